use datainit::init::pca_init;
use datainit::numerics::Tensor;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn images(data: &[f64], count: usize, c: usize, side: usize) -> Vec<Tensor> {
    let n = c * side * side;
    (0..count)
        .map(|i| Tensor::new(vec![c, side, side], data[i * n..(i + 1) * n].to_vec()).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// One block per image and one channel: the filters are the scatter
    /// matrix's eigenvectors, largest eigenvalue first, sign-normalized.
    #[test]
    fn single_block_matches_direct_eigendecomposition(
        m in 2usize..4,
        data in prop::collection::vec(0.0f64..1.0, 30 * 9),
    ) {
        let mm = m * m;
        let ims = images(&data, 30, 1, m);
        let bank = pca_init(&ims, mm, m, 1, false).unwrap();
        let x = DMatrix::from_fn(30, mm, |i, j| ims[i].data()[j]);
        let eig = (x.transpose() * &x).symmetric_eigen();
        let mut order: Vec<usize> = (0..mm).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        // skip draws with (nearly) repeated eigenvalues, where eigenvectors are not unique
        let gap = vals.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
        prop_assume!(gap > 1e-3 * vals[0]);
        for (j, &col) in order.iter().enumerate() {
            let v: Vec<f64> = eig.eigenvectors.column(col).iter().copied().collect();
            let big = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            let s = big.signum();
            for (a, b) in bank.filters.row(j).iter().zip(&v) {
                prop_assert!((a - s * b).abs() < 1e-8, "filter {j}: {a} vs {}", s * b);
            }
        }
    }

    #[test]
    fn banks_are_orthonormal_per_channel(
        c in 1usize..4,
        side in 4usize..8,
        m in 2usize..4,
        data in prop::collection::vec(0.0f64..1.0, 12 * 3 * 49),
    ) {
        let ims = images(&data, 12, c, side);
        let mm = m * m;
        let bank = pca_init(&ims, mm, m, c, false).unwrap();
        for i in 0..mm {
            for j in 0..mm {
                let dot: f64 = (0..c)
                    .map(|ch| {
                        let (a, b) = (&bank.filters.row(i)[ch * mm..(ch + 1) * mm], &bank.filters.row(j)[ch * mm..(ch + 1) * mm]);
                        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
                    })
                    .sum::<f64>()
                    * c as f64;
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-8);
            }
        }
    }
}
