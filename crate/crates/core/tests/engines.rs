mod common;

use common::{random_clifford_circuit, tv_distance};
use surface_lab::rng::stream_rng;
use surface_lab::sim::{run_circuit, Engine};

#[test]
fn tableau_and_statevector_agree_on_random_clifford_circuits() {
    let mut rng = stream_rng(11, 0);
    for i in 0..100 {
        let c = random_clifford_circuit(&mut rng);
        let t = run_circuit(&c, Engine::Tableau, None, 10_000, i).unwrap();
        let s = run_circuit(&c, Engine::StateVector, None, 10_000, i + 1).unwrap();
        let tv = tv_distance(&t, &s);
        assert!(tv <= 0.05, "circuit {i}: tv {tv}\n{}", c.to_text());
    }
}

#[test]
fn frame_sampler_matches_tableau() {
    let mut rng = stream_rng(12, 0);
    for i in 0..50 {
        let c = random_clifford_circuit(&mut rng);
        let t = run_circuit(&c, Engine::Tableau, None, 10_000, i).unwrap();
        let f = run_circuit(&c, Engine::Frame, None, 10_000, i + 1).unwrap();
        let tv = tv_distance(&t, &f);
        assert!(tv <= 0.05, "circuit {i}: tv {tv}\n{}", c.to_text());
    }
}

#[test]
fn same_seed_same_shots() {
    let mut rng = stream_rng(13, 0);
    let c = random_clifford_circuit(&mut rng);
    for engine in [Engine::Tableau, Engine::StateVector, Engine::Frame] {
        let a = run_circuit(&c, engine, None, 3000, 5).unwrap();
        let b = run_circuit(&c, engine, None, 3000, 5).unwrap();
        assert_eq!(a, b, "{engine:?}");
    }
}
