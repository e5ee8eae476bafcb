mod common;

use std::path::PathBuf;

use bnprune::exact::{brute_force_marginals, exact_marginals, DEFAULT_STATE_CAP};
use bnprune::io::{load_network, parse_bif_subset, parse_native, serialize_native};
use bnprune::{Assignment, Error};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

#[test]
fn asia_has_eight_nodes_and_eighteen_parameters() {
    let net = load_network(data("asia.bif")).unwrap();
    assert_eq!(net.num_vars(), 8);
    assert_eq!(common::parameter_count(&net), 18);
    let names: Vec<&str> = net.variables().iter().map(|v| v.name.as_str()).collect();
    assert_eq!(names, ["asia", "tub", "smoke", "lung", "bronc", "either", "xray", "dysp"]);
    assert_eq!(net.variable(0).states, ["yes", "no"]);
}

#[test]
fn asia_tables_are_read_in_file_order() {
    let net = load_network(data("asia.bif")).unwrap();
    let tub = net.variable_id("tub").unwrap();
    // P(tub = yes | asia = yes) = 0.05, P(tub = yes | asia = no) = 0.01
    assert_eq!(net.cpt(tub).column(0), &[0.05, 0.95]);
    assert_eq!(net.cpt(tub).column(1), &[0.01, 0.99]);
    let either = net.variable_id("either").unwrap();
    assert_eq!(net.variable(either).parents, vec![net.variable_id("lung").unwrap(), tub]);
    // logical or: either = yes unless both parents are no
    assert_eq!(net.cpt(either).column(3), &[0.0, 1.0]);
    assert_eq!(net.cpt(either).column(1), &[1.0, 0.0]);
}

#[test]
fn asia_exact_marginals_match_brute_force() {
    let net = load_network(data("asia.bif")).unwrap();
    let dysp = net.variable_id("dysp").unwrap();
    let e = Assignment::from_pairs(8, [(dysp, 0)]);
    let ve = exact_marginals(&net, &e).unwrap();
    let bf = brute_force_marginals(&net, &e, DEFAULT_STATE_CAP).unwrap();
    assert!(ve.max_abs_diff(&bf) < 1e-12);
    let direct = common::brute_marginals(&net, &[(dysp, 0)]);
    assert!(common::max_abs_diff(&direct, ve.iter()) < 1e-12);
}

#[test]
fn alarm_has_thirty_seven_nodes() {
    let net = load_network(data("alarm.bif")).unwrap();
    assert_eq!(net.num_vars(), 37);
    assert_eq!(common::parameter_count(&net), 509);
    let m = exact_marginals(&net, &Assignment::empty(37)).unwrap();
    for row in m.iter() {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn win95pts_loads() {
    let net = load_network(data("win95pts.bif")).unwrap();
    assert_eq!(net.num_vars(), 76);
    assert_eq!(common::parameter_count(&net), 574);
}

#[test]
fn loaded_networks_round_trip_through_native_format() {
    for name in ["asia.bif", "alarm.bif"] {
        let net = load_network(data(name)).unwrap();
        assert_eq!(parse_native(&serialize_native(&net)).unwrap(), net, "{name}");
    }
}

#[test]
fn continuous_variable_is_unsupported() {
    let text = "network n { }\nvariable x {\n  type continuous;\n}\n";
    assert!(matches!(parse_bif_subset(text), Err(Error::Unsupported { line: 3, .. })));
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_network(data("does-not-exist.bif")).unwrap_err();
    assert!(err.is_io());
}
