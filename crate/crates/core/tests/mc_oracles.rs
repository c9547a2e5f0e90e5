use clockmap_core::clock_exact::{ClockModel, SpinConfig};
use clockmap_core::clock_mc::{
    estimate_energy, estimate_heat_capacity, reweight_fidelity, reweight_fidelity_central, run_chain, run_chains, Chain,
    McConfig, Proposal, Start,
};
use clockmap_core::scan::{betas_for, derive_seed, scan_fidelity, McSettings};
use clockmap_core::stats::blocked_mean;
use clockmap_core::{beta_from_temperature, temperature_from_beta};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CAP: u128 = 1 << 28;

fn cfg(d: usize, l: usize, t: f64, sweeps: usize, seed: u64) -> McConfig {
    McConfig {
        sweeps,
        therm: 2_000,
        seed,
        ..McConfig::new(d, l, t)
    }
}

#[test]
fn metropolis_matches_enumeration() {
    let cases: [(usize, usize, [f64; 3]); 4] = [
        (2, 4, [1.5, 2.27, 3.5]),
        (3, 4, [0.7, 1.0, 1.5]),
        (5, 3, [0.6, 0.9, 1.5]),
        (6, 3, [0.5, 0.8, 1.2]),
    ];
    let mut cfgs = Vec::new();
    for (i, (d, l, temps)) in cases.iter().enumerate() {
        for (j, &t) in temps.iter().enumerate() {
            let mut c = cfg(*d, *l, t, 100_000, derive_seed(2024, (10 * i + j) as u64));
            if j == 1 {
                c.proposal = Proposal::Step;
                c.start = Start::Hot;
            }
            cfgs.push(c);
        }
    }
    for (c, run) in cfgs.iter().zip(run_chains(&cfgs)) {
        let run = run.unwrap();
        let exact = ClockModel::new(c.l, c.d).unwrap().enumerate_thermo(c.t, CAP).unwrap();
        let e = estimate_energy(&run.series).unwrap();
        let cv = estimate_heat_capacity(&run.series).unwrap().total;
        assert!(e.sigmas_from(exact.mean_energy) < 3.0, "{c:?}: E {e:?} vs {}", exact.mean_energy);
        assert!(cv.sigmas_from(exact.heat_capacity) < 3.0, "{c:?}: C_v {cv:?} vs {}", exact.heat_capacity);
    }
}

/// Visit frequencies of every configuration of the 2×2 torus against the
/// Boltzmann weights. Returns the per-state deviations in standard errors.
fn stationary_deviations(d: usize, t: f64, sweeps: usize, proposal: Proposal) -> Vec<f64> {
    let model = ClockModel::new(2, d).unwrap();
    let states = d.pow(4);
    let index = |v: &[u8]| v.iter().rev().fold(0usize, |acc, &x| acc * d + x as usize);
    let weights: Vec<f64> = (0..states)
        .map(|s| {
            let vals: Vec<u8> = (0..4).map(|q| (s / d.pow(q) % d) as u8).collect();
            (-model.energy(&SpinConfig::new(d, vals).unwrap()).unwrap() / t).exp()
        })
        .collect();
    let z: f64 = weights.iter().sum();
    let mut chain = Chain::new(model, SpinConfig::uniform(d, 4, 0).unwrap(), t, proposal).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        chain.metropolis_sweep(&mut rng);
    }
    let mut visits = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        chain.metropolis_sweep(&mut rng);
        visits.push(index(chain.spins().values()));
    }
    (0..states)
        .map(|s| {
            let ind: Vec<f64> = visits.iter().map(|&v| if v == s { 1.0 } else { 0.0 }).collect();
            let est = blocked_mean(&ind, 32).unwrap();
            est.sigmas_from(weights[s] / z)
        })
        .collect()
}

#[test]
fn detailed_balance_on_smallest_torus() {
    // 4 spins, 250k sweeps = 10^6 single-site updates
    let dev = stationary_deviations(2, 1.5, 250_000, Proposal::Uniform);
    assert!(dev.iter().all(|&z| z < 3.0), "{dev:?}");
    // high enough T that every one of the 81 states is visited often
    let dev = stationary_deviations(3, 3.0, 250_000, Proposal::Step);
    let k = dev.len() as f64;
    let chi2: f64 = dev.iter().map(|z| z * z).sum();
    assert!(chi2 < k + 4.0 * (2.0 * k).sqrt(), "chi2 {chi2} over {k} states: {dev:?}");
}

#[test]
fn chains_are_deterministic() {
    let c = McConfig {
        correlations: true,
        ..cfg(5, 8, 0.9, 2_000, 99)
    };
    let a = run_chain(&c).unwrap();
    let b = run_chain(&c).unwrap();
    assert_eq!(a, b);
    let par = run_chains(&[c.clone(), c.clone()]);
    assert_eq!(par[1].as_ref().unwrap(), &a);
    let other = run_chain(&McConfig { seed: 100, ..c }).unwrap();
    assert_ne!(other.series.energy, a.series.energy);
}

#[test]
fn reweighted_fidelity_matches_exact() {
    let (d, l, t) = (3, 3, 1.2);
    let dos = ClockModel::new(l, d).unwrap().density_of_states(CAP).unwrap();
    let run = run_chain(&cfg(d, l, t, 200_000, 5)).unwrap();
    let beta = beta_from_temperature(t);
    for db in [0.005, 0.02, 0.05] {
        let exact_fwd = -dos.log_fidelity(t, db).exp_m1();
        let fwd = reweight_fidelity(&run.series, db).unwrap();
        assert!(fwd.infidelity.sigmas_from(exact_fwd) < 3.0, "δβ={db}: {:?} vs {exact_fwd}", fwd.infidelity);
        let exact_bwd = -dos.log_fidelity(temperature_from_beta(beta - db), db).exp_m1();
        let central = reweight_fidelity_central(&run.series, db).unwrap();
        let exact_c = 0.5 * (exact_fwd + exact_bwd);
        assert!(central.infidelity.sigmas_from(exact_c) < 3.0, "δβ={db}: {:?} vs {exact_c}", central.infidelity);
    }
}

#[test]
fn heat_capacity_error_shrinks_like_root_n() {
    let short = run_chain(&cfg(3, 6, 1.0, 40_000, 21)).unwrap();
    let long = run_chain(&cfg(3, 6, 1.0, 160_000, 22)).unwrap();
    let a = estimate_heat_capacity(&short.series).unwrap().total.std_err;
    let b = estimate_heat_capacity(&long.series).unwrap().total.std_err;
    // four times the samples: about half the error
    let ratio = a / b;
    assert!(ratio > 1.4 && ratio < 2.8, "error ratio {ratio}");
}

#[test]
fn fidelity_tracks_heat_capacity_at_six_states() {
    let mc = McSettings {
        sweeps: 20_000,
        therm: 2_000,
        seed: 3,
        ..McSettings::default()
    };
    let curve = scan_fidelity(6, 16, &betas_for(&[0.6, 0.9, 1.2, 1.6]), 0.002, &mc).unwrap();
    for p in &curve.points {
        assert!(p.valid);
        assert!(p.route_sigmas() < 3.0, "T={}: chi/2={} cv_route={}", p.t, p.chi_f / 2.0, p.cv_route);
    }
}
