use mcert_web::{rigidity_exponents_json, sphere_table_json, weyl_growth_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn zonal_functions_are_normalized_at_the_pole() {
    let v = parse(sphere_table_json(5, 20, 1.0).unwrap());
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["phi"], 1.0);
    }
}

#[test]
fn sl2_volume_grows_like_exp_2r() {
    let v = parse(weyl_growth_json(2, 8.0, 32).unwrap());
    let slope = v["slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.05, "slope {slope}");
}

#[test]
fn exponents_for_rank_five() {
    let v = parse(rigidity_exponents_json(5, 10.0).unwrap());
    assert!((v["exponents"]["alpha0"].as_f64().unwrap() - 1.1).abs() < 1e-12);
    assert_eq!(v["ranks"][0]["m"], 5);
}
