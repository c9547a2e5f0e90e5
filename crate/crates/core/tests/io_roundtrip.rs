use clockmap_core::clock_exact::ClockModel;
use clockmap_core::clock_mc::{estimate_correlation, run_chain, McConfig};
use clockmap_core::io::{
    curve_table, exact_table, push_corr, read_corr, read_curve, read_exact, read_series, series_table, CsvTable, Schema,
};
use clockmap_core::scan::{betas_for, scan_fidelity, McSettings};

#[test]
fn mc_series_survives_csv_bit_for_bit() {
    let run = run_chain(&McConfig {
        sweeps: 500,
        therm: 50,
        seed: 3,
        correlations: true,
        ..McConfig::new(5, 6, 0.9)
    })
    .unwrap();
    let text = series_table(&run.series).to_csv();
    let rows = read_series(&text).unwrap();
    assert_eq!(rows.len(), run.series.len());
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.sample_index, i);
        assert_eq!(r.energy.to_bits(), run.series.energy[i].to_bits());
        assert_eq!(r.bond_sum.to_bits(), run.series.bond_sum[i].to_bits());
    }
    let mut corr = CsvTable::new(Schema::Corr);
    let points = estimate_correlation(&run.series).unwrap();
    push_corr(&mut corr, 0.9, &points);
    let back = read_corr(&corr.to_csv()).unwrap();
    assert_eq!(back.len(), 3);
    assert!(back.iter().zip(&points).all(|(a, b)| a.value == b.value && a.r == b.r));
}

#[test]
fn exact_and_curve_tables_round_trip() {
    let dos = ClockModel::new(3, 3).unwrap().density_of_states(1 << 28).unwrap();
    let thermo: Vec<_> = [0.5, 1.0, 2.0].iter().map(|&t| dos.thermo(t)).collect();
    let rows = read_exact(&exact_table(&thermo).to_csv()).unwrap();
    for (r, th) in rows.iter().zip(&thermo) {
        assert_eq!((r.t, r.log_z, r.energy, r.heat_capacity), (th.t, th.log_z, th.mean_energy, th.heat_capacity));
    }
    let mc = McSettings {
        sweeps: 400,
        therm: 40,
        ..McSettings::default()
    };
    let curve = scan_fidelity(3, 4, &betas_for(&[1.0, 2.0]), 0.01, &mc).unwrap();
    let rows = read_curve(&curve_table(&curve).to_csv()).unwrap();
    for (r, p) in rows.iter().zip(&curve.points) {
        assert_eq!((r.beta, r.chi_f, r.cv_route, r.valid), (p.beta, p.chi_f, p.cv_route, p.valid));
    }
}
