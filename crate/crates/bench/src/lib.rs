//! Synthetic inputs shared by the benchmarks.

use glc_core::Dataset;

/// Two deterministic, overlapping classes shifted apart on every axis.
pub fn two_class(rows: usize, dims: usize) -> Dataset {
    let mut data = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    for r in 0..rows {
        let positive = r % 2 == 0;
        let shift = if positive { 0.35 } else { 0.0 };
        let row = (0..dims)
            .map(|j| {
                // cheap deterministic jitter in [0, 0.65)
                let h = ((r * 31 + j * 17) * 2654435761usize) % 1000;
                shift + h as f64 / 1000.0 * 0.65
            })
            .collect();
        data.push(row);
        labels.push(if positive { "pos" } else { "neg" }.to_string());
    }
    let names = (1..=dims).map(|j| format!("x{j}")).collect();
    Dataset::new(names, data, labels, "class").expect("generated data is valid")
}

#[cfg(test)]
mod tests {
    #[test]
    fn shape() {
        let d = super::two_class(10, 4);
        assert_eq!((d.len(), d.n_attributes()), (10, 4));
        assert_eq!(d.class_set().len(), 2);
    }
}
