use proptest::prelude::*;
use wavescope::signal::*;
use wavescope::TimeSeries;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_exact(
        v in prop::collection::vec(-1e12f64..1e12, 2..300),
        rate in 0.1f64..1e5,
    ) {
        let x = TimeSeries::new(v.clone(), rate).unwrap();
        let mut buf = Vec::new();
        write_csv(&x, &mut buf).unwrap();
        let y: TimeSeries = parse_csv(&String::from_utf8(buf).unwrap(), Some(rate), &CsvLayout::default()).unwrap();
        prop_assert_eq!(y.samples(), &v[..]);
    }

    #[test]
    fn profile_is_linear(
        a in prop::collection::vec(-100f64..100.0, 16..200),
        c in -10f64..10.0,
        d in -10f64..10.0,
    ) {
        let b: Vec<f64> = a.iter().rev().map(|v| v * 0.5 + 1.0).collect();
        let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| c * x + d * y).collect();
        let pa = profile(&TimeSeries::new(a.clone(), 1.0).unwrap());
        let pb = profile(&TimeSeries::new(b, 1.0).unwrap());
        let pc = profile(&TimeSeries::new(combo, 1.0).unwrap());
        let scale = pc.values().iter().chain(pa.values()).fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..a.len() {
            let expect = c * pa.values()[i] + d * pb.values()[i];
            prop_assert!((pc.values()[i] - expect).abs() <= 1e-9 * scale * (1.0 + c.abs() + d.abs()));
        }
    }

    #[test]
    fn profile_ends_at_zero(v in prop::collection::vec(-1e3f64..1e3, 2..500)) {
        let p = profile(&TimeSeries::new(v.clone(), 1.0).unwrap());
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs())) * v.len() as f64;
        prop_assert!(p.values().last().unwrap().abs() <= 1e-12 * scale);
    }
}

#[test]
fn timed_csv_round_trip_infers_rate() {
    let x = TimeSeries::new(vec![0.5, -1.25, 3.0, 4.5, 2.0], 250.0).unwrap();
    let mut buf = Vec::new();
    write_timed_csv(&x, &mut buf).unwrap();
    let layout = CsvLayout {
        column: 1,
        time_column: Some(0),
        header: true,
    };
    let y: TimeSeries = parse_csv(&String::from_utf8(buf).unwrap(), None, &layout).unwrap();
    assert_eq!(y.samples(), x.samples());
    assert!((y.sample_rate() - 250.0).abs() < 1e-9);
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    let x = TimeSeries::new(vec![1.0, 2.0, 3.5, -7.25], 10.0).unwrap();
    let mut f = std::fs::File::create(&path).unwrap();
    write_csv(&x, &mut f).unwrap();
    drop(f);
    let y: TimeSeries = load_csv(&path, 10.0, 0).unwrap();
    assert_eq!(y.samples(), x.samples());
}
