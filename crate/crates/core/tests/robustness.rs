mod common;

use common::{fixture, random_pair, random_rooted, random_undirected};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siglap::graph::laplacian;
use siglap::robustness::{
    check_spectrum_condition, delta_star, delta_star_bisection, delta_star_with_grid,
    effective_resistance_directed, effective_resistance_undirected, nyquist_sweep,
    rank_one_spectrum_check, r_value, solve_lyapunov, sweep_csv, FrequencyGrid, Regime,
};
use siglap::spectral::{eigenvalues, ProjectionBasis};
use siglap::{projection_basis, reduced_laplacian, DenseMatrix, EdgePerturbation, SignedDigraph};

fn lbar_of(g: &SignedDigraph, q: &ProjectionBasis) -> DenseMatrix {
    reduced_laplacian(&laplacian(g), q).unwrap()
}

#[test]
fn example2_satisfies_spectrum_condition() {
    let g = fixture("example2.edges");
    assert!(check_spectrum_condition(&g));
    assert!(!check_spectrum_condition(&SignedDigraph::new(3)));
}

#[test]
fn example2_pair_1_2_is_sufficient_only() {
    let g = fixture("example2.edges");
    let pert = EdgePerturbation::new(1, 2, 1.0, 1.0, 0.0).unwrap();
    let res = delta_star(&g, &pert).unwrap();
    assert_eq!(res.regime, Some(Regime::SufficientOnly));
    // independent eigenvalue bracketing puts the imaginary-axis crossing in
    // [0.52588, 0.52590] at frequency 0.60344
    assert!(res.delta_star > 0.52588 && res.delta_star < 0.52590, "{}", res.delta_star);
    let w = res.omega_star.unwrap();
    assert!((w - 0.60344).abs() < 1e-4, "{w}");
    assert!((res.necessary_bound - 1.8).abs() < 1e-9);
    // Nyquist curve is real at 0 and near 0.6
    assert!(res.crossings.iter().any(|c| c.omega == 0.0));
    assert!(res.crossings.iter().any(|c| (c.omega - 0.6).abs() < 0.01));
    assert!(res.necessary_bound >= res.delta_star);
}

#[test]
fn example2_pair_2_5_is_exact() {
    let g = fixture("example2.edges");
    let pert = EdgePerturbation::new(2, 5, 1.0, 1.0, 0.0).unwrap();
    let res = delta_star(&g, &pert).unwrap();
    assert_eq!(res.regime, Some(Regime::NecessaryAndSufficient));
    assert!((res.delta_star - 2.323944).abs() < 1e-5, "{}", res.delta_star);
    assert_eq!(res.omega_star, Some(0.0));

    let q = projection_basis(5).unwrap();
    let g0 = r_value(&lbar_of(&g, &q), &q, 2, 5, 1.0, 1.0, 0.0).unwrap();
    assert!(g0.im.abs() < 1e-15);
    assert!((g0.re - 1.0 / 2.3239).abs() < 1e-3);

    // consensus-relevant sides of the bound
    for (delta, want) in [(2.2, true), (2.45, false)] {
        let perturbed = pert.with_delta(delta).unwrap().apply(&g).unwrap();
        assert_eq!(check_spectrum_condition(&perturbed), want, "delta {delta}");
    }
}

#[test]
fn zero_gains_give_zero_r_value() {
    let g = fixture("example2.edges");
    let q = projection_basis(5).unwrap();
    let r = r_value(&lbar_of(&g, &q), &q, 1, 3, 0.0, 0.0, 0.7).unwrap();
    assert_eq!(r, siglap::Complex64::new(0.0, 0.0));
}

#[test]
fn sweep_is_real_at_zero_and_ends_at_the_asymptote() {
    let g = fixture("example2.edges");
    let q = projection_basis(5).unwrap();
    let grid = FrequencyGrid::for_scale(7.0).unwrap();
    let sweep = nyquist_sweep(&lbar_of(&g, &q), &q, 1, 2, 1.0, 1.0, &grid).unwrap();
    assert_eq!(sweep.samples.len(), 2002);
    assert_eq!(sweep.samples[0].omega, 0.0);
    assert_eq!(sweep.samples[0].value.im, 0.0);
    let last = sweep.samples.last().unwrap();
    assert!(last.omega.is_infinite() && last.value.norm() == 0.0);
    let csv = sweep_csv(&sweep);
    assert_eq!(csv.lines().count(), 2003);
    assert!(csv.lines().last().unwrap().starts_with("inf,"));
}

#[test]
fn symmetric_graph_transfer_is_real_at_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = random_undirected(&mut rng, 6, 0.3);
    let q = projection_basis(6).unwrap();
    let r = r_value(&lbar_of(&g, &q), &q, 2, 5, 1.0, 0.5, 0.0).unwrap();
    assert_eq!(r.im, 0.0);
}

#[test]
fn bisection_oracle_agrees_with_the_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut exact, mut sufficient) = (0, 0);
    for trial in 0..40 {
        let n = 2 + trial % 8;
        let g = random_rooted(&mut rng, n, 0.25);
        let pert = random_pair(&mut rng, n);
        let res = delta_star(&g, &pert).unwrap();
        let oracle = delta_star_bisection(&g, &pert).unwrap();
        match res.regime.unwrap() {
            Regime::NecessaryAndSufficient => {
                exact += 1;
                assert!(
                    (res.delta_star - oracle).abs() < 1e-6 * res.delta_star.max(1.0),
                    "trial {trial}: {} vs {oracle}",
                    res.delta_star
                );
            }
            Regime::SufficientOnly => {
                sufficient += 1;
                assert!(res.delta_star <= oracle + 1e-6, "trial {trial}");
            }
        }
    }
    assert!(exact > 0);
    let _ = sufficient;
}

#[test]
fn bound_is_safe_and_tight_when_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..40 {
        let n = 2 + trial % 7;
        let g = random_rooted(&mut rng, n, 0.3);
        let pert = random_pair(&mut rng, n);
        let res = delta_star(&g, &pert).unwrap();
        let below = pert.with_delta(0.99 * res.delta_star).unwrap().apply(&g).unwrap();
        assert!(check_spectrum_condition(&below), "trial {trial}");
        if res.regime == Some(Regime::NecessaryAndSufficient) {
            let above = pert.with_delta(1.01 * res.delta_star).unwrap().apply(&g).unwrap();
            assert!(!check_spectrum_condition(&above), "trial {trial}");
            // the achieving crossing is the positive static gain
            assert!(res.crossings[0].re > 0.0);
        }
    }
}

#[test]
fn stable_perturbations_have_r_below_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let g = random_rooted(&mut rng, n, 0.3);
        let pert = random_pair(&mut rng, n);
        let delta = rng.random_range(0.0..4.0);
        let perturbed = pert.with_delta(delta).unwrap().apply(&g).unwrap();
        if check_spectrum_condition(&perturbed) {
            let q = projection_basis(n).unwrap();
            let r = delta * r_value(&lbar_of(&g, &q), &q, pert.u, pert.v, pert.q_uv, pert.q_vu, 0.0).unwrap();
            assert!(r.re < 1.0, "r(0) = {r}");
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn r_value_is_basis_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let n = rng.random_range(2..=9);
        let g = common::random_signed(&mut rng, n, 0.4);
        let pert = random_pair(&mut rng, n);
        let omega = rng.random_range(0.0..5.0);
        let qh = ProjectionBasis::helmert(n).unwrap();
        let qr = ProjectionBasis::householder(n).unwrap();
        let a = r_value(&lbar_of(&g, &qh), &qh, pert.u, pert.v, pert.q_uv, pert.q_vu, omega);
        let b = r_value(&lbar_of(&g, &qr), &qr, pert.u, pert.v, pert.q_uv, pert.q_vu, omega);
        if let (Ok(a), Ok(b)) = (a, b) {
            assert!((a - b).norm() < 1e-10 * a.norm().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn rank_one_identity_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let q6 = projection_basis(6).unwrap();
    for trial in 0..100 {
        let n = 3 + trial % 6;
        let g = random_rooted(&mut rng, n, 0.3);
        let q = projection_basis(n).unwrap();
        let lbar1 = lbar_of(&g, &q);
        let pert = random_pair(&mut rng, n).with_delta(rng.random_range(0.0..1.0)).unwrap();
        let one_minus_r = rank_one_spectrum_check(&lbar1, &q, &pert).unwrap();
        let r = pert.delta * r_value(&lbar1, &q, pert.u, pert.v, pert.q_uv, pert.q_vu, 0.0).unwrap();
        assert!((one_minus_r - (1.0 - r)).norm() < 1e-12);
    }
    // δ = 0: L̄ = L̄₁
    let g = random_rooted(&mut rng, 6, 0.3);
    let pert = EdgePerturbation::new(1, 4, 1.0, 0.0, 0.0).unwrap();
    let v = rank_one_spectrum_check(&lbar_of(&g, &q6), &q6, &pert).unwrap();
    assert_eq!(v, siglap::Complex64::new(1.0, 0.0));
    // critical δ: the ratio picks up a zero eigenvalue
    let res = delta_star(&g, &EdgePerturbation::new(1, 4, 1.0, 1.0, 0.0).unwrap()).unwrap();
    let crit = EdgePerturbation::new(1, 4, 1.0, 1.0, res.necessary_bound).unwrap();
    let v = rank_one_spectrum_check(&lbar_of(&g, &q6), &q6, &crit).unwrap();
    assert!(v.norm() < 1e-8);
}

#[test]
fn lyapunov_on_random_stable_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for trial in 0..60 {
        let n = 2 + trial % 10;
        let g = random_rooted(&mut rng, n, 0.3);
        let lbar = lbar_of(&g, &projection_basis(n).unwrap());
        let sigma = solve_lyapunov(&lbar).unwrap();
        let residual = (&lbar * &sigma + &sigma * lbar.transpose() - DenseMatrix::identity(n - 1, n - 1)).amax();
        assert!(residual < 1e-8, "trial {trial}: {residual}");
        assert!((&sigma - sigma.transpose()).amax() < 1e-10);
    }
}

#[test]
fn lyapunov_matches_half_inverse_on_undirected_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..40 {
        let n = 2 + trial % 9;
        let g = random_undirected(&mut rng, n, 0.3);
        let lbar = lbar_of(&g, &projection_basis(n).unwrap());
        let sigma = solve_lyapunov(&lbar).unwrap();
        let half_inv = lbar.clone().try_inverse().unwrap() * 0.5;
        assert!((sigma - half_inv).amax() < 1e-8);
        let u = 1 + trial % n;
        let v = 1 + (trial + 1) % n;
        let a = effective_resistance_undirected(&g, u, v).unwrap().r_uv;
        let b = effective_resistance_directed(&g, u, v).unwrap().r_uv;
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        assert!(a > 0.0);
    }
}

#[test]
fn circuit_resistances() {
    let unit = |edges: &[(usize, usize)], n| {
        SignedDigraph::from_edges(n, edges.iter().flat_map(|&(i, j)| [(i, j, 1.0), (j, i, 1.0)])).unwrap()
    };
    let chain = unit(&[(1, 2), (2, 3)], 3);
    assert!((effective_resistance_undirected(&chain, 1, 3).unwrap().r_uv - 2.0).abs() < 1e-12);
    let tri = unit(&[(1, 2), (2, 3), (1, 3)], 3);
    for (u, v) in [(1, 2), (2, 3), (1, 3)] {
        assert!((effective_resistance_undirected(&tri, u, v).unwrap().r_uv - 2.0 / 3.0).abs() < 1e-12);
    }
    let asym = SignedDigraph::from_edges(2, [(1, 2, 1.0), (2, 1, 2.0)]).unwrap();
    assert!(effective_resistance_undirected(&asym, 1, 2).is_err());
}

#[test]
fn directed_resistance_differs_from_inverse_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut differing = 0;
    for _ in 0..10 {
        let g = random_rooted(&mut rng, 6, 0.5);
        let q = projection_basis(6).unwrap();
        let lbar = lbar_of(&g, &q);
        let c = q.matrix().column(0) - q.matrix().column(3);
        let naive = c.dot(&(lbar.clone().try_inverse().unwrap() * &c));
        let directed = effective_resistance_directed(&g, 1, 4).unwrap().r_uv;
        if (naive - directed).abs() > 1e-6 {
            differing += 1;
        }
    }
    assert!(differing >= 8);
}

#[test]
fn directed_two_node_resistance() {
    let g = SignedDigraph::from_edges(2, [(1, 2, 1.0)]).unwrap();
    let lbar = lbar_of(&g, &projection_basis(2).unwrap());
    assert!((lbar[(0, 0)] - 1.0).abs() < 1e-15);
    let sigma = solve_lyapunov(&lbar).unwrap();
    assert!((sigma[(0, 0)] - 0.5).abs() < 1e-15);
    assert!((effective_resistance_directed(&g, 1, 2).unwrap().r_uv - 2.0).abs() < 1e-12);
}

#[test]
fn narrow_grid_is_widened_before_giving_up() {
    // the only positive crossing is at ω = 0, which is always evaluated, so
    // a grid missing all dynamics still finds it
    let g = fixture("example2.edges");
    let pert = EdgePerturbation::new(2, 5, 1.0, 1.0, 0.0).unwrap();
    let grid = FrequencyGrid::log_spaced(1e3, 1e4, 50, false).unwrap();
    let (res, _) = delta_star_with_grid(&g, &pert, Some(grid)).unwrap();
    assert!((res.delta_star - 2.323944).abs() < 1e-5);
    let spec = eigenvalues(&laplacian(&g)).unwrap();
    assert_eq!(spec.len(), 5);
    let _ = DVector::<f64>::zeros(1);
}
