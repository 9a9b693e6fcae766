use rand::{Rng, SeedableRng};
use surface_lab::decoder::{build_detector_graph, enumerate_faults, Decoder, FaultKind};
use surface_lab::detection::{DetectorSpec, Selection};
use surface_lab::noise::{attach_noise, CalibrationTable, NoiseOptions};
use surface_lab::surface_code::{build_memory_circuit, Basis, CodeLayout};

fn setup(basis: Basis, cycles: usize) -> (DetectorSpec, Vec<surface_lab::decoder::FaultSignature>) {
    let layout = CodeLayout::new(3).unwrap();
    let mem = build_memory_circuit(&layout, basis, cycles).unwrap();
    let cal = CalibrationTable::default_table();
    let (noisy, model) = attach_noise(&mem.circuit, &cal, &NoiseOptions::default()).unwrap();
    let spec = DetectorSpec::new(&layout, &mem, Selection::Consistent);
    let faults = enumerate_faults(&noisy, &model, &spec).unwrap();
    (spec, faults)
}

#[test]
fn single_faults_are_all_corrected() {
    for basis in [Basis::Z, Basis::X] {
        let (spec, faults) = setup(basis, 5);
        let graph = build_detector_graph(&faults, &spec).unwrap();
        for w in &graph.warnings {
            eprintln!("{basis:?}: {w}");
        }
        assert_eq!(graph.undetectable, 0.0);
        let dec = Decoder::new(&graph.with_uniform_weights());
        let mut failures = 0;
        for f in &faults {
            if dec.decode(&f.detectors, f.logical).unwrap() {
                failures += 1;
                eprintln!("{basis:?} uncorrected: {} at {} -> {:?}", f.kind.describe(), f.index, f.detectors);
            }
        }
        eprintln!("{basis:?}: {} faults, {} edges", faults.len(), graph.edges.len());
        assert_eq!(failures, 0);
        for d in 0..spec.n_detectors() {
            assert!(dec.path(d, None).is_some(), "detector {d} cut off from the boundary");
        }
    }
}

#[test]
fn readout_flip_on_ancilla_fires_two_rounds_apart() {
    let (spec, faults) = setup(Basis::Z, 5);
    let z1 = spec.names.iter().position(|n| n == "Z1").unwrap();
    for f in &faults {
        if let FaultKind::Readout { slot, .. } = f.kind {
            if slot < 8 * 5 && slot % 8 == 0 {
                let round = slot / 8 + 1;
                let later = if round == 5 { round + 1 } else { round + 2 };
                let expect = vec![spec.detector(z1, round), spec.detector(z1, later)];
                assert_eq!(f.detectors, expect, "round {round}");
            }
        }
    }
}

#[test]
fn mwpm_matches_brute_force_on_random_sets() {
    let (spec, faults) = setup(Basis::Z, 5);
    let dec = Decoder::new(&build_detector_graph(&faults, &spec).unwrap());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let k = rng.random_range(0..=10);
        let mut fired = rand::seq::index::sample(&mut rng, spec.n_detectors(), k).into_vec();
        fired.sort();
        let m = dec.mwpm(&fired).unwrap();
        assert_eq!(m.weight, dec.brute_force_weight(&fired).unwrap(), "{fired:?}");
    }
}
