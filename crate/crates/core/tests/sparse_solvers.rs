mod common;

use common::{dense_solve, noise};
use hallfem_core::scheme::{step_system, Discretization, Experiment, SchemeConfig, State};
use hallfem_core::sparse::{
    dense_lu_solve, equilibrate, gmres, solve, CsrMatrix, Ilu0, Preconditioner, SolverConfig,
    SolverMethod,
};
use hallfem_core::Error;
use proptest::prelude::*;

fn random_sparse(seed: u64, n: usize, density: f64, diag: f64) -> CsrMatrix {
    let v = noise(seed, 2 * n * n);
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, diag));
        for j in 0..n {
            if (v[n * n + i * n + j] + 1.0) / 2.0 < density {
                t.push((i, j, v[i * n + j]));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &t).unwrap()
}

fn inf_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn triplets_sum_duplicates_and_sort_columns() {
    let m = CsrMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 2, 4.0)])
        .unwrap();
    assert_eq!(m.nnz(), 3);
    assert_eq!(m.row_ptr(), &[0, 1, 3]);
    assert_eq!(m.col_idx(), &[1, 0, 2]);
    assert_eq!(m.values(), &[2.0, 3.0, 5.0]);
    assert_eq!(m.get(1, 2), 5.0);
    assert_eq!(m.get(0, 0), 0.0);

    let empty = CsrMatrix::from_triplets(3, 4, &[]).unwrap();
    assert_eq!((empty.nrows(), empty.ncols(), empty.nnz()), (3, 4, 0));
    assert_eq!(empty.matvec(&[1.0; 4]), vec![0.0; 3]);

    assert!(matches!(
        CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]),
        Err(Error::IndexOutOfRange { .. })
    ));
}

#[test]
fn csr_products_match_dense_arithmetic() {
    let a = random_sparse(1, 9, 0.4, 0.0);
    let b = random_sparse(2, 9, 0.4, 1.0);
    let (da, db) = (a.to_dense(), b.to_dense());
    let prod = a.matmul(&b).to_dense();
    for i in 0..9 {
        for j in 0..9 {
            let want: f64 = (0..9).map(|k| da[i][k] * db[k][j]).sum();
            assert!((prod[i][j] - want).abs() < 1e-14);
        }
    }
    let x = noise(3, 9);
    assert!(inf_diff(&a.matvec(&x), &common::matvec(&da, &x)) < 1e-14);
    assert!(inf_diff(&a.matvec_transpose(&x), &a.transpose().matvec(&x)) < 1e-14);
    assert_eq!(CsrMatrix::from_dense(&da), a.pruned());
    let s = a.add_scaled(2.0, &b, -1.0).to_dense();
    for i in 0..9 {
        for j in 0..9 {
            assert!((s[i][j] - (2.0 * da[i][j] - db[i][j])).abs() < 1e-14);
        }
    }
}

#[test]
fn identity_solves_exactly() {
    let b = noise(4, 17);
    for cfg in [
        SolverConfig::default(),
        SolverConfig::dense(),
        SolverConfig::gmres(),
    ] {
        let (x, _) = solve(&CsrMatrix::identity(17), &b, &cfg).unwrap();
        assert!(inf_diff(&x, &b) < 1e-15);
    }
}

#[test]
fn spd_system_matches_dense_reference() {
    let r = random_sparse(5, 40, 0.15, 0.0);
    let a = r
        .transpose()
        .matmul(&r)
        .add_scaled(1.0, &CsrMatrix::identity(40), 1.0);
    let b = noise(6, 40);
    let want = dense_solve(a.to_dense(), b.clone());
    for method in [
        SolverMethod::Auto,
        SolverMethod::SparseLu,
        SolverMethod::DenseLu,
        SolverMethod::Gmres,
    ] {
        let cfg = SolverConfig {
            method,
            tolerance: 1e-13,
            ..SolverConfig::default()
        };
        let (x, info) = solve(&a, &b, &cfg).unwrap();
        assert!(inf_diff(&x, &want) < 1e-9, "{method:?}");
        assert!(info.residual < 1e-10);
    }
}

#[test]
fn singular_matrix_is_reported() {
    let z = CsrMatrix::zeros(5, 5);
    let b = vec![1.0; 5];
    assert!(matches!(
        solve(&z, &b, &SolverConfig::default()),
        Err(Error::SingularMatrix { .. })
    ));
    assert!(matches!(
        dense_lu_solve(&z, &b),
        Err(Error::SingularMatrix { .. })
    ));
    // rank one
    let r1 = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 4.0)])
        .unwrap();
    assert!(matches!(
        solve(&r1, &[1.0, 0.0], &SolverConfig::dense()),
        Err(Error::SingularMatrix { .. })
    ));
}

#[test]
fn gmres_reports_non_convergence() {
    let a = random_sparse(7, 60, 0.5, 0.0);
    let cfg = SolverConfig {
        method: SolverMethod::Gmres,
        max_iterations: 3,
        restart: 3,
        preconditioner: Preconditioner::None,
        tolerance: 1e-12,
    };
    assert!(matches!(
        solve(&a, &noise(8, 60), &cfg),
        Err(Error::NotConverged { .. })
    ));
}

#[test]
fn bad_solver_configuration_is_rejected() {
    let a = CsrMatrix::identity(3);
    for cfg in [
        SolverConfig {
            tolerance: 0.0,
            ..SolverConfig::default()
        },
        SolverConfig {
            restart: 0,
            ..SolverConfig::default()
        },
    ] {
        assert!(matches!(solve(&a, &[1.0; 3], &cfg), Err(Error::Config(_))));
    }
    assert!(matches!(
        solve(&a, &[1.0; 2], &SolverConfig::default()),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn ilu0_is_exact_on_triangular_and_tridiagonal_matrices() {
    // ILU(0) produces no fill, so on a tridiagonal matrix it is the full LU
    let n = 30;
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 4.0 + i as f64 * 0.1));
        if i > 0 {
            t.push((i, i - 1, -1.0));
        }
        if i + 1 < n {
            t.push((i, i + 1, -1.5));
        }
    }
    let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
    let ilu = Ilu0::new(&a);
    assert_eq!(ilu.shifted_pivots(), 0);
    let b = noise(9, n);
    let x = ilu.apply(&b);
    assert!(inf_diff(&a.matvec(&x), &b) < 1e-13);
}

#[test]
fn gmres_with_ilu_converges() {
    let a = random_sparse(10, 80, 0.05, 4.0);
    let b = noise(11, 80);
    let ilu = Ilu0::new(&a);
    let (x, iters, res) = gmres(&a, &b, None, &|r| ilu.apply(r), 1e-12, 30, 500);
    assert!(res <= 1e-12);
    assert!(iters < 80);
    let want = dense_solve(a.to_dense(), b);
    assert!(inf_diff(&x, &want) < 1e-9);
}

#[test]
fn equilibration_balances_rows_and_columns() {
    let mut t = Vec::new();
    let v = noise(12, 400);
    for i in 0..20 {
        for j in 0..20 {
            if (i + 2 * j) % 3 == 0 || i == j {
                t.push((i, j, (v[i * 20 + j] + 1.5) * 10f64.powi(i as i32 % 7 - 3)));
            }
        }
    }
    let a = CsrMatrix::from_triplets(20, 20, &t).unwrap();
    let (r, c) = equilibrate(&a, 8);
    let mut rmax = [0.0f64; 20];
    let mut cmax = [0.0f64; 20];
    for (i, j, x) in a.iter() {
        let s = (r[i] * x * c[j]).abs();
        rmax[i] = rmax[i].max(s);
        cmax[j] = cmax[j].max(s);
    }
    assert!(
        rmax.iter().chain(&cmax).all(|m| (m - 1.0).abs() < 0.1),
        "{rmax:?} {cmax:?}"
    );
}

#[test]
fn matrix_market_export() {
    let a = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.5), (1, 2, -2.0)]).unwrap();
    let mut buf = Vec::new();
    a.write_matrix_market(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('%')).collect();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
    assert_eq!(
        lines[0].split_whitespace().collect::<Vec<_>>(),
        ["2", "3", "2"]
    );
    let entries: Vec<(usize, usize, f64)> = lines[1..]
        .iter()
        .map(|l| {
            let p: Vec<&str> = l.split_whitespace().collect();
            (
                p[0].parse().unwrap(),
                p[1].parse().unwrap(),
                p[2].parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(entries, vec![(1, 1, 1.5), (2, 3, -2.0)]);
}

fn random_state(disc: &Discretization, seed: u64) -> State {
    let mut s = State::zero(disc);
    let mut k = seed;
    for (v, space) in [
        (&mut s.u, &disc.velocity),
        (&mut s.b, &disc.magnetic),
        (&mut s.e, &disc.edge),
        (&mut s.j, &disc.edge),
    ] {
        let r = noise(k, v.len());
        k += 1;
        for &i in space.free_dofs() {
            v[i] = r[i];
        }
    }
    s.time = 0.2;
    s
}

#[test]
fn step_systems_agree_across_solvers() {
    for (n, dim, exp) in [
        (2, 2, Experiment::OrszagTang),
        (1, 3, Experiment::Abc3d),
        (2, 3, Experiment::Harris),
    ] {
        let disc = Discretization::new(n, dim).unwrap();
        let cfg = SchemeConfig::preset(exp, n, 0.05, 1.0);
        let prev = random_state(&disc, 20);
        let (a, b) = step_system(&disc, &prev, &cfg);
        let (x_dense, _) = solve(&a, &b, &SolverConfig::dense()).unwrap();
        let (x_lu, _) = solve(&a, &b, &SolverConfig::default()).unwrap();
        let cfg_g = SolverConfig {
            tolerance: 1e-13,
            ..SolverConfig::gmres()
        };
        let (x_g, info) = solve(&a, &b, &cfg_g).unwrap();
        let scale = x_dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(inf_diff(&x_lu, &x_dense) <= 1e-10 * scale, "{exp:?} lu");
        assert!(
            inf_diff(&x_g, &x_dense) <= 1e-8 * scale,
            "{exp:?} gmres {info:?}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sparse_lu_matches_dense_on_random_systems(seed in 0u64..10_000, n in 1usize..25) {
        let a = random_sparse(seed, n, 0.3, 3.0);
        let b = noise(seed + 1, n);
        let want = dense_solve(a.to_dense(), b.clone());
        let (x, _) = solve(&a, &b, &SolverConfig::default()).unwrap();
        prop_assert!(inf_diff(&x, &want) < 1e-10);
    }

    #[test]
    fn transpose_is_an_involution(seed in 0u64..10_000, n in 1usize..20) {
        let a = random_sparse(seed, n, 0.3, 0.0);
        prop_assert_eq!(a.transpose().transpose(), a.clone());
        let (x, y) = (noise(seed + 2, n), noise(seed + 3, n));
        let lhs = a.bilinear(&x, &y);
        let rhs: f64 = y.iter().zip(a.transpose().matvec(&x)).map(|(p, q)| p * q).sum();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }
}
