//! Integration tests for network assembly: summation fidelity against a
//! scalar oracle, depth padding, and wire-format round-trips.

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::Rng;

use spikenet::relu_net::{pad_to_depth, sum_networks};
use spikenet::stream::{dyadic_unit, stream_rng};
use spikenet::{AffineLayer, Network, ReluNetwork};

/// Builds a random small network with the given input dimension.
fn random_network(rng: &mut impl Rng, input_dim: usize, depth: usize) -> Network {
    let mut widths = vec![input_dim];
    for _ in 0..depth - 1 {
        widths.push(rng.random_range(1..=5));
    }
    widths.push(1);
    let layers = (0..depth)
        .map(|i| {
            let rows = widths[i + 1];
            let cols = widths[i];
            let weights =
                Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0f64..1.0));
            let bias = Array1::from_shape_fn(rows, |_| rng.random_range(-0.5f64..0.5));
            AffineLayer { weights, bias }
        })
        .collect();
    ReluNetwork::new(input_dim, layers).unwrap()
}

#[test]
fn summation_matches_scalar_sum_of_summands() {
    let mut rng = stream_rng(11, 0);
    for case in 0..50 {
        let d = 1 + case % 3;
        let count = 1 + case % 7;
        let nets: Vec<Network> = (0..count)
            .map(|_| {
                let depth = rng.random_range(1..=4);
                random_network(&mut rng, d, depth)
            })
            .collect();
        let sum = sum_networks(&nets).unwrap();
        assert_eq!(sum.output_dim(), 1);
        for _ in 0..40 {
            let x: Vec<f64> = (0..d).map(|_| dyadic_unit(&mut rng)).collect();
            let direct: f64 = nets.iter().map(|n| n.evaluate(&x).unwrap()).sum();
            let combined = sum.evaluate(&x).unwrap();
            let tol = 1e-10 * direct.abs().max(1.0);
            assert!(
                (combined - direct).abs() <= tol,
                "case {case}: sum {combined} vs scalar {direct}"
            );
        }
    }
}

#[test]
fn summation_width_is_the_sum_of_widths_plus_padding_rails() {
    // Equal-depth nets stack without padding: interior widths add up.
    let mut rng = stream_rng(12, 0);
    let a = random_network(&mut rng, 2, 3);
    let b = random_network(&mut rng, 2, 3);
    let sum = sum_networks(&[a.clone(), b.clone()]).unwrap();
    let wa = a.widths();
    let wb = b.widths();
    let ws = sum.widths();
    assert_eq!(ws[0], 2);
    for i in 1..3 {
        assert_eq!(ws[i], wa[i] + wb[i]);
    }
    assert_eq!(*ws.last().unwrap(), 1);
}

#[test]
fn padding_preserves_the_function_bitwise() {
    let mut rng = stream_rng(13, 0);
    for _ in 0..20 {
        let d = rng.random_range(1..=3);
        let depth = rng.random_range(1..=3);
        let net = random_network(&mut rng, d, depth);
        let padded = pad_to_depth(&net, net.depth() + rng.random_range(1..=3)).unwrap();
        for _ in 0..50 {
            let x: Vec<f64> = (0..d).map(|_| dyadic_unit(&mut rng)).collect();
            // Dual-rail padding is exact: relu(t) - relu(-t) == t for every
            // finite float, so the padded network is bitwise identical.
            assert_eq!(net.evaluate(&x).unwrap(), padded.evaluate(&x).unwrap());
        }
    }
}

#[test]
fn mixed_depth_summation_stays_close_to_scalar_sum() {
    let mut rng = stream_rng(14, 0);
    let nets: Vec<Network> = vec![
        random_network(&mut rng, 2, 1),
        random_network(&mut rng, 2, 4),
        random_network(&mut rng, 2, 2),
    ];
    let sum = sum_networks(&nets).unwrap();
    assert_eq!(sum.depth(), 4);
    for _ in 0..100 {
        let x = [dyadic_unit(&mut rng), dyadic_unit(&mut rng)];
        let direct: f64 = nets.iter().map(|n| n.evaluate(&x).unwrap()).sum();
        let combined = sum.evaluate(&x).unwrap();
        assert!((combined - direct).abs() <= 1e-10 * direct.abs().max(1.0));
    }
}

#[test]
fn wire_format_is_stable_and_self_describing() {
    let net = ReluNetwork::new(
        1,
        vec![
            AffineLayer {
                weights: Array2::from_shape_vec((2, 1), vec![1.0, -1.0]).unwrap(),
                bias: Array1::from(vec![0.0, 0.5]),
            },
            AffineLayer {
                weights: Array2::from_shape_vec((1, 2), vec![0.25, -0.75]).unwrap(),
                bias: Array1::from(vec![0.125]),
            },
        ],
    )
    .unwrap();
    let json = net.to_json();
    assert!(json.contains("\"activation\":\"relu\""));
    assert!(json.contains("\"input_dim\":1"));
    let parsed = Network::from_json(&json).unwrap();
    assert_eq!(parsed, net);
}

#[test]
fn malformed_payloads_are_rejected_with_positions() {
    // Truncated JSON: parse error with a line/column position.
    let err = Network::from_json("{\"input_dim\":1,").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("line"), "unexpected message: {msg}");

    // Wrong activation: schema error.
    let err = Network::from_json(
        "{\"input_dim\":1,\"activation\":\"tanh\",\"layers\":[{\"weights\":[[1.0]],\"bias\":[0.0]}]}",
    )
    .unwrap_err();
    assert!(err.to_string().contains("relu"), "got: {err}");

    // Ragged weight rows: schema error naming the layer.
    let err = Network::from_json(
        "{\"input_dim\":2,\"activation\":\"relu\",\"layers\":[{\"weights\":[[1.0,2.0],[3.0]],\"bias\":[0.0,0.0]}]}",
    )
    .unwrap_err();
    assert!(err.to_string().contains("layer"), "got: {err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// JSON round-trips reproduce every parameter bitwise (serde_json uses
    /// shortest-round-trip float formatting).
    #[test]
    fn json_round_trip_is_bitwise(seed in 0u64..1_000_000) {
        let mut rng = stream_rng(seed, 7);
        let d = rng.random_range(1..=4);
        let depth = rng.random_range(1..=4);
        let net = random_network(&mut rng, d, depth);
        let round = Network::from_json(&net.to_json()).unwrap();
        prop_assert_eq!(&round, &net);
        // And evaluation agrees bitwise on a probe point.
        let x: Vec<f64> = (0..d).map(|_| dyadic_unit(&mut rng)).collect();
        prop_assert_eq!(net.evaluate(&x).unwrap(), round.evaluate(&x).unwrap());
    }

    /// Summation fidelity as a property: up to 20 random summands.
    #[test]
    fn summation_fidelity_property(seed in 0u64..1_000_000) {
        let mut rng = stream_rng(seed, 9);
        let d = rng.random_range(1..=3);
        let count = rng.random_range(1..=20);
        let nets: Vec<Network> = (0..count)
            .map(|_| {
                let depth = rng.random_range(1..=5);
                random_network(&mut rng, d, depth)
            })
            .collect();
        let sum = sum_networks(&nets).unwrap();
        for _ in 0..10 {
            let x: Vec<f64> = (0..d).map(|_| dyadic_unit(&mut rng)).collect();
            let direct: f64 = nets.iter().map(|n| n.evaluate(&x).unwrap()).sum();
            let combined = sum.evaluate(&x).unwrap();
            prop_assert!((combined - direct).abs() <= 1e-10 * direct.abs().max(1.0));
        }
    }
}
