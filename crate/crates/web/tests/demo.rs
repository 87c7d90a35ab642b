use unsharp_web::{cap_scan_json, janssens_scatter_json, toeplitz_spectrum_json, MAX_LEVEL};

fn parse(s: &str) -> serde_json::Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn spin_spectrum_is_evenly_spaced() {
    let v = parse(&toeplitz_spectrum_json(6, "q3").unwrap());
    let ev: Vec<f64> = v["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(ev.len(), 7);
    for (k, e) in ev.iter().enumerate() {
        assert!((e - (2.0 * k as f64 - 6.0) / 8.0).abs() < 1e-10);
    }
    assert!(toeplitz_spectrum_json(6, "q9").is_err());
    assert!(toeplitz_spectrum_json(MAX_LEVEL + 1, "q3").is_err());
}

#[test]
fn cap_scan_reports_each_level() {
    let v = parse(&cap_scan_json(4, 1.2, &[4, 8]).unwrap());
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["nu_q"].as_f64().unwrap() > 0.0));
    assert!(v["area_fraction"].as_f64().unwrap() < 0.5);
    assert!(cap_scan_json(5, 1.2, &[4]).is_err());
}

#[test]
fn scatter_stays_below_diagonal() {
    let v = parse(&janssens_scatter_json(11, 50).unwrap());
    let pts = v.as_array().unwrap();
    assert_eq!(pts.len(), 50);
    for p in pts {
        assert!(
            p["half_comm"].as_f64().unwrap() <= p["sqrt_noise_product"].as_f64().unwrap() + 1e-9
        );
    }
    assert_eq!(
        janssens_scatter_json(11, 5).unwrap(),
        janssens_scatter_json(11, 5).unwrap()
    );
}
