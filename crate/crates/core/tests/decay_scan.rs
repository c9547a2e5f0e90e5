use clockmap_core::clock_mc::CorrelationPoint;
use clockmap_core::scan::{classify_phases, default_r_range, fit_decay, grid, DecayCriteria, DecayLabel, McSettings};
use clockmap_core::{beta_from_temperature, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn recovery(l: usize, model: &dyn Fn(f64) -> f64, want: DecayLabel, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let criteria = DecayCriteria::default();
    (0..200)
        .filter(|_| {
            let table: Vec<CorrelationPoint> = (1..=l / 2)
                .map(|r| CorrelationPoint {
                    r,
                    value: model(r as f64) + 0.01 * gaussian(&mut rng),
                    std_err: 0.01,
                })
                .collect();
            fit_decay(&table, default_r_range(l), None, &criteria).unwrap().label == want
        })
        .count()
}

#[test]
fn synthetic_decays_are_recovered() {
    for l in [32, 64] {
        let cases: [(&dyn Fn(f64) -> f64, DecayLabel); 3] = [
            (&|r| r.powf(-0.25), DecayLabel::PowerLaw),
            (&|r| (-r / 2.0).exp(), DecayLabel::Exponential),
            (&|_| 0.6, DecayLabel::LongRange),
        ];
        for (i, (f, want)) in cases.iter().enumerate() {
            let hits = recovery(l, *f, *want, 100 + i as u64);
            assert!(hits >= 190, "L={l} {want:?}: {hits}/200");
        }
    }
}

#[test]
fn ising_control_has_no_wide_middle_phase() {
    let temps = grid(1.6, 3.4, 0.2).unwrap();
    let mc = McSettings {
        sweeps: 10_000,
        therm: 1_000,
        seed: 17,
        ..McSettings::default()
    };
    let report = classify_phases(2, &[16], &temps, &mc, &DecayCriteria::default()).unwrap();
    let labels: Vec<DecayLabel> = report.temperatures.iter().map(|t| t.label).collect();
    let step = temps[1] - temps[0];
    for r in report.regimes.iter().filter(|r| r.label == DecayLabel::PowerLaw) {
        assert!(r.t_max - r.t_min <= step + 1e-9, "{labels:?}");
    }
    assert_eq!(report.temperatures.first().unwrap().label, DecayLabel::LongRange);
    assert_eq!(report.temperatures.last().unwrap().label, DecayLabel::Exponential);
    for b in &report.boundaries {
        assert_eq!(b.beta, beta_from_temperature(b.t));
    }
    // boundaries ascend in T, so their mapped β descend
    for w in report.boundaries.windows(2) {
        assert!(w[0].t < w[1].t && w[0].beta > w[1].beta);
    }
}

#[test]
fn too_short_table_is_an_error() {
    let table: Vec<CorrelationPoint> = (1..=2).map(|r| CorrelationPoint { r, value: 0.5, std_err: 0.01 }).collect();
    assert!(matches!(
        fit_decay(&table, (1, 2), None, &DecayCriteria::default()),
        Err(Error::InsufficientData { .. })
    ));
}
