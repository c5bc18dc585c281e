use rnfs_wasm::{census_json, factor_json, rho_value};

#[test]
fn rho_matches_closed_form() {
    assert!((rho_value(2.0).unwrap() - (1.0 - 2f64.ln())).abs() < 1e-9);
    assert!(rho_value(-1.0).is_err());
}

#[test]
fn census_is_well_formed() {
    let v: serde_json::Value =
        serde_json::from_str(&census_json(200, 300, 30, 100_000, 100_000, 100, 0.5).unwrap()).unwrap();
    assert_eq!(v["partition_identity_holds"], true);
    assert_eq!(v["points"], serde_json::json!([100_000]));
    let rows = v["moduli"].as_array().unwrap();
    assert_eq!(
        rows.len() as u64,
        v["good"].as_u64().unwrap() + v["bad"].as_u64().unwrap() + v["indeterminate"].as_u64().unwrap()
    );
    assert!(census_json(1009, 1012, 5, 1000, 1000, 10, 0.5).is_err());
}

#[test]
fn factors_and_limits() {
    let v: serde_json::Value = serde_json::from_str(&factor_json("8051", 1).unwrap()).unwrap();
    assert_eq!(v["factors"], serde_json::json!(["83", "97"]));
    assert!(factor_json("1099511627791", 1).is_err());
    assert!(factor_json("x", 1).is_err());
}
