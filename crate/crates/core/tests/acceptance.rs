//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{
    all_partitions, is_equitable, max_abs, random_network, random_network_sized, random_s_ij, rng,
    twin_network, weak_sync_oracle,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use swingsync::fixtures::{two_hub_lines, two_hub_network};
use swingsync::simulator::drift_invariant;
use swingsync::sync::{gamma_p, synchronized_pairs};
use swingsync::{
    aggregate, analyze, build_laplacian, build_p, coarsest_equitable_refinement, compare, in_s_ij,
    integrate, lift, project_initial, strong_sync, weak_sync, Generator, Line, Partition,
    PowerNetwork, SimConfig, DEFAULT_TOL,
};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scaled(rows: &[&[f64]], s: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |r, c| rows[r][c] / s)
}

fn one_based(n: usize, clusters: &[&[usize]]) -> Partition {
    Partition::from_one_based(clusters.iter().map(|c| c.to_vec()).collect(), n).unwrap()
}

fn gamma_golden() -> Outcome {
    let (_, ks) = analyze(&two_hub_network()).map_err(|e| e.to_string())?;
    let expected = scaled(
        &[
            &[21.0, 5.0, 2.0, 2.0, 2.0],
            &[5.0, 21.0, 2.0, 2.0, 2.0],
            &[2.0, 2.0, 16.0, 8.0, 4.0],
            &[2.0, 2.0, 8.0, 16.0, 4.0],
            &[2.0, 2.0, 4.0, 4.0, 20.0],
        ],
        32.0,
    );
    let err = max_abs(&(&ks.gamma - expected));
    ensure(err <= 1e-12, || format!("max entry error {err:.3e}"))?;
    Ok(format!("max entry error {err:.3e}"))
}

fn pair_synchronization() -> Outcome {
    let net = two_hub_network();
    let (_, ks) = analyze(&net).map_err(|e| e.to_string())?;
    let pairs = synchronized_pairs(&net, &ks, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let shown: Vec<_> = pairs.iter().map(|(i, j)| (i + 1, j + 1)).collect();
    ensure(pairs == vec![(0, 1), (2, 3)], || format!("pairs {shown:?}"))?;
    Ok(format!("pairs {shown:?} of 10"))
}

fn partition_verdicts() -> Outcome {
    let net = two_hub_network();
    let (_, ks) = analyze(&net).map_err(|e| e.to_string())?;
    let e = |x: swingsync::Error| x.to_string();
    let a = one_based(5, &[&[1, 2], &[3, 4], &[5]]);
    let b = one_based(5, &[&[1, 2], &[3, 4, 5]]);
    let c = one_based(5, &[&[1, 2, 3], &[4, 5]]);
    ensure(
        strong_sync(&net, &ks, &a, DEFAULT_TOL).map_err(e)?.verdict,
        || "{{1,2},{3,4},{5}} not strong".into(),
    )?;
    ensure(
        !strong_sync(&net, &ks, &b, DEFAULT_TOL).map_err(e)?.verdict,
        || "{{1,2},{3,4,5}} strong".into(),
    )?;
    ensure(
        weak_sync(&net, &ks, &b, DEFAULT_TOL).map_err(e)?.verdict,
        || "{{1,2},{3,4,5}} not weak".into(),
    )?;
    ensure(
        !weak_sync(&net, &ks, &c, DEFAULT_TOL).map_err(e)?.verdict,
        || "{{1,2,3},{4,5}} weak".into(),
    )?;
    let expected = scaled(
        &[
            &[13.0, 3.0],
            &[13.0, 3.0],
            &[2.0, 14.0],
            &[2.0, 14.0],
            &[2.0, 14.0],
        ],
        16.0,
    );
    let err = max_abs(&(gamma_p(&ks, &b) - expected));
    ensure(err <= 1e-12, || format!("Gamma P error {err:.3e}"))?;
    Ok(format!("3 verdicts, Gamma P error {err:.3e}"))
}

fn aggregation_golden() -> Outcome {
    let net = two_hub_network();
    let part = one_based(5, &[&[1, 2], &[3, 4, 5]]);
    let reduced = aggregate(&net, &part).map_err(|e| e.to_string())?;
    let close = |a: &[f64], b: &[f64]| {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
    };
    ensure(close(reduced.inertia(), &[2.0, 3.0]), || {
        format!("M {:?}", reduced.inertia())
    })?;
    ensure(close(reduced.damping(), &[2.0, 3.0]), || {
        format!("D {:?}", reduced.damping())
    })?;
    ensure(close(reduced.power(), &[0.0, 0.0]), || {
        format!("f {:?}", reduced.power())
    })?;
    ensure(close(reduced.emf(), &[1.0, 1.0]), || {
        format!("E {:?}", reduced.emf())
    })?;
    let ld = reduced.gen_admittance();
    ensure(close(ld.as_slice(), &[2.0, 3.0]), || format!("L_D {ld:?}"))?;
    let blocks = build_laplacian(&reduced);
    let l11 = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]));
    let l12 = DMatrix::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, -3.0]);
    let e11 = max_abs(&(&blocks.l11 - l11));
    let e12 = max_abs(&(&blocks.l12 - l12));
    ensure(e11 <= 1e-12 && e12 <= 1e-12, || {
        format!("L11 {e11:.3e} L12 {e12:.3e}")
    })?;
    let (_, ks) = analyze(&reduced).map_err(|e| e.to_string())?;
    let expected = scaled(&[&[13.0, 3.0], &[3.0, 21.0]], 8.0);
    let err = max_abs(&(&ks.gamma - expected));
    ensure(err <= 1e-12, || format!("reduced Gamma error {err:.3e}"))?;
    Ok(format!("reduced Gamma error {err:.3e}"))
}

fn exact_reduction() -> Outcome {
    let net = two_hub_network();
    let (_, ks) = analyze(&net).map_err(|e| e.to_string())?;
    let part = one_based(5, &[&[1, 2], &[3, 4, 5]]);
    let agg = build_p(&part);
    let reduced = aggregate(&net, &part).map_err(|e| e.to_string())?;
    let (_, ks_hat) = analyze(&reduced).map_err(|e| e.to_string())?;
    let cfg = SimConfig {
        t_end: 10.0,
        dt: 1e-3,
        with_voltages: true,
    };
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let levels = [r.random_range(-1.5..1.5), r.random_range(-1.5..1.5)];
        let d0: Vec<f64> = part.labels().iter().map(|&l| levels[l]).collect();
        let w0 = vec![0.0; 5];
        let (full, lifted) = std::thread::scope(|s| {
            let full = s.spawn(|| integrate(&ks, &net, &d0, &w0, &cfg));
            let (dh, wh) = project_initial(&agg, &d0, &w0)?;
            let red = integrate(&ks_hat, &reduced, dh.as_slice(), wh.as_slice(), &cfg)?;
            Ok::<_, swingsync::Error>((full.join().unwrap()?, lift(&agg, &red)?))
        })
        .map_err(|e| e.to_string())?;
        let m = compare(&full, &lifted).map_err(|e| e.to_string())?;
        let errs = [
            m.max_abs_delta_err,
            m.max_abs_omega_err,
            m.max_abs_v_err.unwrap_or(f64::INFINITY),
            m.max_abs_theta_err.unwrap_or(f64::INFINITY),
        ];
        let e = errs.iter().fold(0.0f64, |a, &b| a.max(b));
        ensure(e <= 1e-6, || format!("trial {trial}: errors {errs:?}"))?;
        worst = worst.max(e);
    }
    Ok(format!("20 trials, worst error {worst:.3e}"))
}

fn non_equitable_reduction() -> Outcome {
    let net = two_hub_network();
    let (_, ks) = analyze(&net).map_err(|e| e.to_string())?;
    let part = one_based(5, &[&[1, 2, 3], &[4, 5]]);
    let agg = build_p(&part);
    let reduced = aggregate(&net, &part).map_err(|e| e.to_string())?;
    let (_, ks_hat) = analyze(&reduced).map_err(|e| e.to_string())?;
    let cfg = SimConfig::default();
    let d0 = [0.0, 0.1, 0.2, 0.3, 0.4];
    let w0 = [0.0; 5];
    let full = integrate(&ks, &net, &d0, &w0, &cfg).map_err(|e| e.to_string())?;
    let (dh, wh) = project_initial(&agg, &d0, &w0).map_err(|e| e.to_string())?;
    let red = integrate(&ks_hat, &reduced, dh.as_slice(), wh.as_slice(), &cfg)
        .map_err(|e| e.to_string())?;
    let lifted = lift(&agg, &red).map_err(|e| e.to_string())?;
    let m = compare(&full, &lifted).map_err(|e| e.to_string())?;
    ensure(m.max_abs_delta_err >= 1e-3, || {
        format!("transient error {:.3e} < 1e-3", m.max_abs_delta_err)
    })?;
    ensure(m.terminal_delta_err <= 1e-2, || {
        format!("terminal error {:.3e} > 1e-2", m.terminal_delta_err)
    })?;
    Ok(format!(
        "transient {:.3e}, terminal {:.3e}",
        m.max_abs_delta_err, m.terminal_delta_err
    ))
}

fn lemma_suites() -> Outcome {
    let mut r = rng(7);
    let mut pairs_checked = 0usize;
    let mut symmetric_pairs = 0usize;
    for k in 0..200 {
        // Every third network carries a mirrored generator pair.
        let net = match k % 3 {
            0 => twin_network(&mut r, 8, 8, false, k % 2 == 0),
            _ => random_network(&mut r, 8, 8),
        };
        let (_, ks) = analyze(&net).map_err(|e| e.to_string())?;
        let n = net.generators();
        let ones = DVector::from_element(n, 1.0);
        let x_err = (&ks.x * &ones - &ones).amax();
        ensure(x_err <= 1e-10, || {
            format!("network {k}: |X1 - 1| = {x_err:.3e}")
        })?;
        let g = &ks.gamma;
        ensure(max_abs(&(g - g.transpose())) <= 1e-12 * max_abs(g), || {
            format!("network {k}: Gamma not symmetric")
        })?;
        ensure(g.iter().all(|&v| v > 0.0), || {
            format!("network {k}: Gamma entry <= 0")
        })?;
        let min_eig = g.clone().symmetric_eigen().eigenvalues.min();
        ensure(min_eig > 0.0, || {
            format!("network {k}: min eigenvalue {min_eig:.3e}")
        })?;
        let ld = ks.ld_matrix();
        for i in 0..n {
            for j in i + 1..n {
                let lhs = in_s_ij(g, i, j, DEFAULT_TOL).map_err(|e| e.to_string())?;
                let rhs = in_s_ij(&ld, i, j, DEFAULT_TOL).map_err(|e| e.to_string())?
                    && in_s_ij(&ks.schur, i, j, DEFAULT_TOL).map_err(|e| e.to_string())?;
                ensure(lhs == rhs, || {
                    format!("network {k}: pair ({i}, {j}) {lhs} vs {rhs}")
                })?;
                pairs_checked += 1;
                symmetric_pairs += lhs as usize;
            }
        }
    }
    let mut inverses = 0usize;
    for k in 0..1000 {
        let n = r.random_range(2..=8);
        let i = r.random_range(0..n);
        let j = (i + r.random_range(1..n)) % n;
        let a = random_s_ij(&mut r, n, i, j, false);
        let b = random_s_ij(&mut r, n, i, j, false);
        let check = |m: &DMatrix<f64>, tol: f64, what: &str| {
            ensure(in_s_ij(m, i, j, tol).unwrap_or(false), || {
                format!("member {k}: {what} left S_ij")
            })
        };
        check(&a, DEFAULT_TOL, "member")?;
        check(&(&a + &b), DEFAULT_TOL, "sum")?;
        check(&(&a * &b), DEFAULT_TOL, "product")?;
        if let Some(inv) = a.clone().try_inverse() {
            let cond = a.norm() * inv.norm();
            if cond < 1e6 {
                check(&inv, DEFAULT_TOL * cond, "inverse")?;
                inverses += 1;
            }
        }
    }
    Ok(format!(
        "200 networks, {pairs_checked} pairs ({symmetric_pairs} symmetric), 1000 members ({inverses} inverses)"
    ))
}

/// Two-hub topology with random line reactances that keep the mirror
/// symmetries of generators 1, 2 and 3, 4; uniform generator parameters.
fn symmetric_random_network(r: &mut impl Rng) -> PowerNetwork {
    let mut chi = || r.random_range(0.3..3.0);
    let (a, b, c, d, e) = (chi(), chi(), chi(), chi(), chi());
    let lines: Vec<Line> = two_hub_lines()
        .into_iter()
        .map(|l| {
            let x = match l.key() {
                (0, 5) | (1, 5) => a,
                (2, 6) | (3, 6) => b,
                (2, 3) => c,
                (4, 6) => d,
                _ => e,
            };
            Line::new(l.from, l.to, x)
        })
        .collect();
    let g = Generator {
        inertia: 1.3,
        damping: 0.7,
        power: 0.2,
        emf: 1.1,
        reactance: 0.8,
    };
    PowerNetwork::new(&[g; 5], 2, lines).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let mut r = rng(11);
    let partitions = all_partitions(5);
    ensure(partitions.len() == 52, || {
        format!("{} partitions", partitions.len())
    })?;
    let mut weak_count = 0usize;
    let networks = [
        symmetric_random_network(&mut r),
        two_hub_network(),
        random_network_sized(&mut r, 5, 3),
    ];
    for (k, net) in networks.into_iter().enumerate() {
        let (_, ks) = analyze(&net).map_err(|e| e.to_string())?;
        for part in &partitions {
            let got = weak_sync(&net, &ks, part, DEFAULT_TOL)
                .map_err(|e| e.to_string())?
                .verdict;
            let want = weak_sync_oracle(&net, &ks.gamma, part, DEFAULT_TOL);
            ensure(got == want, || {
                format!(
                    "network {k}, {:?}: weak_sync {got}, oracle {want}",
                    part.to_one_based()
                )
            })?;
            weak_count += got as usize;
        }
        for seed in &partitions {
            let refined = coarsest_equitable_refinement(&ks, &net, seed, DEFAULT_TOL)
                .map_err(|e| e.to_string())?;
            ensure(
                refined.refines(seed) && is_equitable(&ks.gamma, &refined, DEFAULT_TOL),
                || {
                    format!(
                        "network {k}, seed {:?}: bad refinement",
                        seed.to_one_based()
                    )
                },
            )?;
            for other in &partitions {
                if other.refines(seed) && is_equitable(&ks.gamma, other, DEFAULT_TOL) {
                    ensure(other.refines(&refined), || {
                        format!(
                            "network {k}, seed {:?}: {:?} is equitable but not below {:?}",
                            seed.to_one_based(),
                            other.to_one_based(),
                            refined.to_one_based()
                        )
                    })?;
                }
            }
        }
    }
    Ok(format!(
        "3 networks x 52 partitions, {weak_count} weakly synchronized"
    ))
}

fn drift_law() -> Outcome {
    let mut r = rng(13);
    let cfg = SimConfig::default();
    let mut worst = 0.0f64;
    for k in 0..20 {
        let net = random_network(&mut r, 6, 6);
        let (_, ks) = analyze(&net).map_err(|e| e.to_string())?;
        let n = net.generators();
        let d0: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let w0: Vec<f64> = (0..n).map(|_| r.random_range(-0.5..0.5)).collect();
        let traj = integrate(&ks, &net, &d0, &w0, &cfg).map_err(|e| e.to_string())?;
        let c0 = drift_invariant(&net, 0.0, &traj.delta[0], &traj.omega[0]);
        for s in 0..traj.len() {
            let c = drift_invariant(&net, traj.times[s], &traj.delta[s], &traj.omega[s]);
            worst = worst.max((c - c0).abs());
        }
        ensure(worst <= 1e-6, || format!("system {k}: drift {worst:.3e}"))?;
    }
    Ok(format!("20 systems, max drift {worst:.3e}"))
}

fn integrator_order() -> Outcome {
    let a = Generator {
        inertia: 1.0,
        damping: 1.0,
        power: 0.3,
        emf: 1.0,
        reactance: 1.0,
    };
    let b = Generator {
        power: -0.3,
        inertia: 2.0,
        ..a
    };
    let net =
        PowerNetwork::new(&[a, b], 0, vec![Line::new(0, 1, 0.5)]).map_err(|e| e.to_string())?;
    let (_, ks) = analyze(&net).map_err(|e| e.to_string())?;
    let d0 = [1.0, -1.0];
    let w0 = [0.5, 0.0];
    let dt = 0.05;
    let terminal = |h: f64| -> Result<DVector<f64>, String> {
        let cfg = SimConfig {
            t_end: 10.0,
            dt: h,
            with_voltages: false,
        };
        let s = integrate(&ks, &net, &d0, &w0, &cfg)
            .map_err(|e| e.to_string())?
            .final_state()
            .ok_or("empty trajectory")?;
        Ok(DVector::from_iterator(
            4,
            s.delta.iter().chain(s.omega.iter()).copied(),
        ))
    };
    let reference = terminal(dt / 64.0)?;
    let e1 = (terminal(dt)? - &reference).amax();
    let e2 = (terminal(dt / 2.0)? - &reference).amax();
    let ratio = e1 / e2;
    ensure((12.0..=20.0).contains(&ratio), || {
        format!("ratio {ratio:.3}")
    })?;
    Ok(format!(
        "error ratio {ratio:.3} (dt {dt}, {e1:.3e} -> {e2:.3e})"
    ))
}

fn main() -> ExitCode {
    let criteria: [Check; 10] = [
        ("coupling matrix golden values", gamma_golden),
        ("synchronized generator pairs", pair_synchronization),
        ("partition verdicts", partition_verdicts),
        ("aggregation golden values", aggregation_golden),
        (
            "exact reduction of weakly synchronized clusters",
            exact_reduction,
        ),
        (
            "transient and terminal error of a non-equitable reduction",
            non_equitable_reduction,
        ),
        ("structural lemmas on random networks", lemma_suites),
        (
            "weak sync and refinement against brute force",
            oracle_equivalence,
        ),
        ("drift law", drift_law),
        ("RK4 convergence order", integrator_order),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail} ({secs:.2}s)", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {detail} ({secs:.2}s)", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
