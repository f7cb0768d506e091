//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;

use common::{check_jumps, draw, draw_diffusion, draw_dom, label_index, rng, Jumps};
use moran_core::ancestral::{
    crossing, fig7_configs, fig7_scan, h_inf_via_l, h_inf_via_recursion, h_inf_via_ytilde,
    h_r_via_l, log_grid,
};
use moran_core::diffusion::{
    build_q_rcal, check_diffusion_duality, lcal_chain, moran_stationary_moments, rcal_chain,
    BoundaryPolicy, ExponentForm, StationaryDensity,
};
use moran_core::dualities::{
    check_conjugation, check_descendant_equality, check_factorial_duality, check_h_representation,
    check_siegmund_duality, check_ytilde_l_duality,
};
use moran_core::generators::{
    branching_coeff_big, build_q_descendant, build_q_l, build_q_r, build_q_siegmund, build_q_y_dom,
    build_q_y_ftw, build_q_ytilde, build_t_exact, build_t_inv_exact, Ctmc, DenseMatrix, State,
};
use moran_core::graphical::{
    descendant_counts, empirical_ancestral_type, extract_pld_path, extract_r_path, sample_event_log,
};
use moran_core::haldane::{expected_r_inf, expected_r_inf_direct, haldane_scan};
use moran_core::params::dom_to_ftw;
use moran_core::rng::{run_replicates, StreamRng};
use moran_core::{DiffusionParams, ModelParams};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

const UNIF_TOL: f64 = 1e-12;

fn sanity_ok(c: &Ctmc, worst: &mut f64) -> bool {
    let (rowsum, offdiag) = c.sanity();
    *worst = worst.max(rowsum);
    rowsum <= 1e-12 && offdiag >= 0.0
}

fn c1_generator_sanity() -> Verdict {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for _ in 0..200 {
        let n = r.random_range(2..=50);
        let p = draw(&mut r, n);
        let dom = draw_dom(&mut r, n);
        let dp = draw_diffusion(&mut r);
        let chains = [
            build_q_y_ftw(&p).unwrap(),
            build_q_y_dom(&dom).unwrap(),
            build_q_r(&p).unwrap(),
            build_q_l(&p).unwrap(),
            build_q_ytilde(&p).unwrap(),
            build_q_siegmund(&p).unwrap(),
            build_q_descendant(&draw(&mut r, n.min(12)), 12).unwrap(),
            rcal_chain(&dp, 60, BoundaryPolicy::ReflectReport).unwrap(),
            lcal_chain(&dp, 60, BoundaryPolicy::ReflectReport).unwrap(),
        ];
        bad += chains.iter().filter(|c| !sanity_ok(c, &mut worst)).count();
    }
    verdict(
        bad == 0,
        format!("200 draws x 9 builders, worst |row sum| {worst:.2e}, {bad} bad"),
    )
}

fn c2_dom_ftw() -> Verdict {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = r.random_range(2..=50);
        let dom = draw_dom(&mut r, n);
        let ftw =
            ModelParams::ftw(n, dom.u, dom.nu0, dom_to_ftw(&dom.selection.rates).unwrap()).unwrap();
        let a = build_q_y_dom(&dom).unwrap().dense();
        let b = build_q_y_ftw(&ftw).unwrap().dense();
        worst = worst.max(a.max_abs_diff(&b));
    }
    verdict(
        worst <= 1e-13,
        format!("max entrywise gap {worst:.2e} over 100 draws (tol 1e-13)"),
    )
}

fn falling(x: u64, j: u64) -> BigUint {
    (0..j).fold(BigUint::one(), |a, i| {
        if i >= x {
            BigUint::zero()
        } else {
            a * (x - i)
        }
    })
}

fn ratio_ff(k: u64, n: u64, j: u64) -> BigRational {
    BigRational::new(BigInt::from(falling(k, j)), BigInt::from(falling(n, j)))
}

fn c3_combinatorics() -> Verdict {
    let mut failures = 0;
    for big in 1..=30u64 {
        for n in 0..=big {
            for m in 1..=6u32 {
                let lhs: BigUint = (1..=m)
                    .map(|j| branching_coeff_big(n, m, j) * falling(big - n, j as u64))
                    .sum();
                let rhs = BigUint::from(big).pow(m) - BigUint::from(n).pow(m);
                failures += (lhs != rhs) as u32;
            }
        }
    }
    for big in 1..=12usize {
        let t = build_t_exact(big);
        let ti = build_t_inv_exact(big);
        let prod = t.matmul(&ti).unwrap();
        if prod != DenseMatrix::identity(big + 2) {
            failures += 1;
        }
    }
    for big in 1..=25u64 {
        for k in 1..=big {
            for n in 1..=k {
                let lhs = (1..n).fold(BigRational::zero(), |a, j| a + ratio_ff(k, big, j));
                let d = BigInt::from(big - k + 1);
                let rhs = BigRational::new(BigInt::from(k), d.clone())
                    - BigRational::new(BigInt::from(big - n + 1), d) * ratio_ff(k, big, n);
                failures += (lhs != rhs) as u32;
            }
        }
    }
    verdict(
        failures == 0,
        format!("branching identity, T T^-1 = I, auxiliary identity: {failures} failures"),
    )
}

fn duality_grid(seed: u64, f: impl Fn(&ModelParams, f64) -> f64 + Sync) -> f64 {
    let mut r = rng(seed);
    let draws: Vec<ModelParams> = (0..20).map(|_| draw(&mut r, 20)).collect();
    draws
        .par_iter()
        .flat_map(|p| [0.1, 1.0, 10.0].into_par_iter().map(|t| f(p, t)))
        .reduce(|| 0.0, f64::max)
}

fn c4_factorial() -> Verdict {
    let worst = duality_grid(4, |p, t| {
        check_factorial_duality(p, t, UNIF_TOL)
            .unwrap()
            .max_abs_residual
    });
    verdict(
        worst <= 1e-10,
        format!("max residual {worst:.2e} (tol 1e-10), N=20, 20 draws x 3 times"),
    )
}

fn c5_ytilde_l() -> Verdict {
    let a = duality_grid(5, |p, t| {
        check_ytilde_l_duality(p, t, UNIF_TOL)
            .unwrap()
            .max_abs_residual
    });
    let b = duality_grid(5, |p, t| {
        check_h_representation(p, t, UNIF_TOL)
            .unwrap()
            .max_abs_residual
    });
    verdict(
        a <= 1e-10 && b <= 1e-10,
        format!("duality residual {a:.2e}, h_t = E[Y~_t]/N residual {b:.2e} (tol 1e-10)"),
    )
}

fn c6_siegmund() -> Verdict {
    let mut r = rng(6);
    let mut trans: f64 = 0.0;
    for _ in 0..10 {
        let p = draw(&mut r, 15);
        for t in [0.1, 1.0, 10.0] {
            trans = trans.max(
                check_siegmund_duality(&p, t, UNIF_TOL)
                    .unwrap()
                    .max_abs_residual,
            );
        }
    }
    let mut conj: f64 = 0.0;
    for n in 1..=12 {
        let p = draw(&mut r, n);
        conj = conj.max(check_conjugation(&p).unwrap().max_abs_residual);
    }
    verdict(
        trans <= 1e-10 && conj <= 1e-12,
        format!("transient residual {trans:.2e} at N=15 (tol 1e-10), conjugation {conj:.2e} for N<=12 (tol 1e-12)"),
    )
}

fn c7_three_routes() -> Verdict {
    let mut r = rng(7);
    let jobs: Vec<ModelParams> = [10, 50, 200]
        .iter()
        .flat_map(|&n| (0..50).map(|_| draw(&mut r, n)).collect::<Vec<_>>())
        .collect();
    let (a, b) = jobs
        .par_iter()
        .map(|p| {
            let rec = h_inf_via_recursion(p).unwrap();
            let l = h_inf_via_l(p).unwrap();
            let y = h_inf_via_ytilde(p).unwrap();
            (l.max_diff(&rec), rec.max_diff(&y))
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
    verdict(
        a <= 1e-10 && b <= 1e-10,
        format!("|h_L - h_REC| {a:.2e}, |h_REC - h_Y~| {b:.2e} over 150 solves (tol 1e-10)"),
    )
}

fn c8_descendant() -> Verdict {
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let p = draw(&mut r, 8);
        for t in [0.5, 2.0] {
            worst = worst.max(
                check_descendant_equality(&p, t, UNIF_TOL)
                    .unwrap()
                    .max_abs_residual,
            );
        }
    }
    verdict(
        worst <= 1e-10,
        format!("max |E[D_t+B_t] - E[Y~_t]| {worst:.2e} at N=8 (tol 1e-10)"),
    )
}

const REPS: u64 = 1_000_000;

fn mc_jumps<S: Ord + Clone + Send>(
    seed: u64,
    f: impl Fn(&mut StreamRng) -> Vec<S> + Sync,
) -> Jumps<S> {
    (0..REPS)
        .into_par_iter()
        .fold(Jumps::default, |mut acc, i| {
            let mut g = StreamRng::new(seed, i);
            acc.record(&f(&mut g));
            acc
        })
        .reduce(Jumps::default, |mut a, b| {
            a.merge(b);
            a
        })
}

fn c9_monte_carlo() -> Verdict {
    let p = ModelParams::ftw(8, 0.6, 0.4, [(1, 0.4), (3, 0.3)]).unwrap();
    let q_r = build_q_r(&p).unwrap();
    let sample: Vec<u32> = (0..4).collect();
    let r_jumps = mc_jumps(91, |g| {
        let log = sample_event_log(&p, 1.0, g).unwrap();
        extract_r_path(&log, &sample).unwrap().path.values
    });
    let r_check = check_jumps(&r_jumps, &q_r, label_index(&q_r), 1000);

    let q_l = build_q_l(&p).unwrap();
    let l_jumps = mc_jumps(92, |g| {
        let log = sample_event_log(&p, 2.0, g).unwrap();
        extract_pld_path(&log, &[0]).unwrap().l.values
    });
    let l_check = check_jumps(&l_jumps, &q_l, label_index(&q_l), 1000);

    let pd = ModelParams::ftw(6, 0.8, 0.4, [(1, 0.5), (2, 0.3)]).unwrap();
    let q_d = build_q_descendant(&pd, 12).unwrap();
    let colouring = [1, 1, 1, 0, 0, 0];
    let d_jumps = mc_jumps(93, |g| {
        let log = sample_event_log(&pd, 1.0, g).unwrap();
        descendant_counts(&log, &[0, 1, 3, 4], &colouring)
            .unwrap()
            .states
    });
    let d_check = check_jumps(
        &d_jumps,
        &q_d,
        |s| q_d.index_of(State::Triple(*s)).unwrap(),
        1000,
    );

    let pa = ModelParams::ftw(10, 0.5, 0.3, [(1, 0.6), (2, 0.2)]).unwrap();
    let (r_time, k) = (1.0, 4);
    let h = h_r_via_l(&pa, r_time, UNIF_TOL).unwrap().h[k];
    let n_anc = 100_000;
    let types = run_replicates(94, n_anc, |_, g| {
        let log = sample_event_log(&pa, r_time, g).unwrap();
        empirical_ancestral_type(&log, k, g).unwrap() as u64
    });
    let mean = types.iter().sum::<u64>() as f64 / n_anc as f64;
    let z_anc = (mean - h).abs() / (h * (1.0 - h) / n_anc as f64).sqrt();

    let pass = r_check.passes() && l_check.passes() && d_check.passes() && z_anc <= 4.0;
    verdict(
        pass,
        format!(
            "worst z: R {:.2} ({} rows), L {:.2} ({} rows), descendant {:.2} ({} rows), ancestral type {:.2} (h_r {h:.4}, mean {mean:.4})",
            r_check.worst_z, r_check.rows, l_check.worst_z, l_check.rows, d_check.worst_z, d_check.rows, z_anc
        ),
    )
}

fn c10_haldane() -> Verdict {
    let ns = [10_000, 100_000, 1_000_000, 10_000_000];
    let mut pass = true;
    let mut parts = Vec::new();
    for m in 1..=3 {
        let rows = haldane_scan(1.0, m, 0.5, &ns).unwrap();
        let first = (rows[0].ratio - 1.0).abs();
        let last = (rows[3].ratio - 1.0).abs();
        pass &= last < first && last <= 0.05;
        parts.push(format!("m={m}: |ratio-1| {first:.3e} -> {last:.3e}"));
    }
    verdict(pass, parts.join("; "))
}

fn c11_r_inf() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in [2, 5, 10, 30, 60, 100] {
        for m in 1..=3 {
            for (sigma, alpha) in [(1.0, 0.5), (2.0, 0.3), (0.5, 0.9)] {
                let a = expected_r_inf(n, sigma, m, alpha).unwrap();
                let b = expected_r_inf_direct(n, sigma, m, alpha).unwrap();
                worst = worst.max((a - b).abs());
            }
        }
    }
    let big = 10_000_000usize;
    let mut ratio_gap: f64 = 0.0;
    for m in 1..=3 {
        let e = expected_r_inf(big, 1.0, m, 0.5).unwrap();
        ratio_gap = ratio_gap.max((e / (m as f64 * (big as f64).sqrt()) - 1.0).abs());
    }
    verdict(
        worst <= 1e-8 && ratio_gap <= 0.05,
        format!("routes agree to {worst:.2e} (tol 1e-8); |E[R]/(m sigma N^(1-alpha)) - 1| {ratio_gap:.3e} at N=1e7 (tol 0.05)"),
    )
}

fn c12_fig7() -> Verdict {
    let b = 0.005;
    let grid = log_grid(0.1, 10.0, 41);
    let configs = fig7_configs(b);
    let rows = fig7_scan(10_000, 0.005, b, &grid, &configs).unwrap();
    let curve = |label: &str, anc: bool| -> Vec<f64> {
        rows.iter()
            .filter(|r| r.config_label == label)
            .map(|r| {
                if anc {
                    r.mean_unfit_ancestor
                } else {
                    r.mean_unfit
                }
            })
            .collect()
    };
    let genic = curve("genic", false);
    let below = configs[1..].iter().all(|c| {
        curve(&c.label, false)
            .iter()
            .zip(&genic)
            .all(|(o, g)| g < o)
    });
    let increasing = configs.iter().all(|c| {
        [false, true]
            .iter()
            .all(|&anc| curve(&c.label, anc).windows(2).all(|w| w[1] > w[0]))
    });
    let cross = crossing(&grid, &genic, 0.5);
    let cross_anc = crossing(&grid, &curve("genic", true), 0.5);
    let near = cross.is_some_and(|x| (x - 1.0).abs() <= 0.5);
    verdict(
        below && increasing && near,
        format!(
            "genic below others: {below}; all curves increasing: {increasing}; genic unfit proportion crosses 0.5 at u/b = {} (need |u/b - 1| <= 0.5); unfit-ancestor curve crosses at u/b = {}",
            cross.map_or("none".into(), |x| format!("{x:.4}")),
            cross_anc.map_or("none".into(), |x| format!("{x:.4}")),
        ),
    )
}

fn moment_gap(dp: &DiffusionParams, form: ExponentForm, oracle: &[f64]) -> f64 {
    let d = StationaryDensity::new(dp, form).unwrap();
    oracle
        .iter()
        .enumerate()
        .map(|(i, &o)| (d.moment(i as u32 + 1) - o).abs())
        .fold(0.0, f64::max)
}

fn c13_diffusion() -> Verdict {
    let dp = DiffusionParams::new(1.0, 0.3, [(1, 1.0)]).unwrap();
    let rep = check_diffusion_duality(&dp, 200).unwrap();
    let doubling = build_q_rcal(&dp, 200).unwrap().leaked_mass_bound;
    let orders: Vec<u32> = (1..=5).collect();
    let oracle = moran_stationary_moments(&dp, 2000, &orders).unwrap();
    let genic_k = moment_gap(&dp, ExponentForm::Harmonic, &oracle);
    let genic_kf = moment_gap(&dp, ExponentForm::Factorial, &oracle);
    let dp3 = DiffusionParams::new(1.0, 0.3, [(1, 1.0), (3, 3.0)]).unwrap();
    let oracle3 = moran_stationary_moments(&dp3, 2000, &orders).unwrap();
    let third_k = moment_gap(&dp3, ExponentForm::Harmonic, &oracle3);
    let third_kf = moment_gap(&dp3, ExponentForm::Factorial, &oracle3);
    println!(
        "    exponent decision: sigma={{1:1}} y^k/k gap {genic_k:.3e}, y^k/k! gap {genic_kf:.3e}; \
         sigma={{1:1,3:3}} y^k/k gap {third_k:.3e}, y^k/k! gap {third_kf:.3e}"
    );
    let pass =
        rep.max_abs_residual <= 2e-3 && doubling <= 1e-6 && genic_k <= 5e-3 && third_k <= 5e-3;
    verdict(
        pass,
        format!(
            "duality residual {:.2e} (tol 2e-3), doubling gap {doubling:.2e} (tol 1e-6), moments vs N=2000: {genic_k:.2e} / {third_k:.2e} (tol 5e-3)",
            rep.max_abs_residual
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 13] = [
        ("generator sanity", c1_generator_sanity),
        ("DOM/FTW equivalence", c2_dom_ftw),
        ("combinatorial identities", c3_combinatorics),
        ("factorial-moment duality", c4_factorial),
        ("Y~/L duality and h representation", c5_ytilde_l),
        ("Siegmund duality and conjugation", c6_siegmund),
        ("three-route h_inf agreement", c7_three_routes),
        ("descendant equality", c8_descendant),
        ("Monte Carlo graphical consistency", c9_monte_carlo),
        ("Haldane asymptotics", c10_haldane),
        ("E[R_inf]", c11_r_inf),
        ("error-threshold scan", c12_fig7),
        ("diffusion duality", c13_diffusion),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("criterion {:>2}", i + 1);
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|s| id.contains(s.as_str()) || name.contains(s.as_str()))
        {
            continue;
        }
        let start = Instant::now();
        let v = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{id} [{}] {name}: {} ({secs:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += !v.pass as u32;
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
