use std::collections::BTreeMap;

use pmpnbp::engine::{
    compute_message_weights, draw_message_locations, run_inference, update_belief, update_message, EngineConfig,
    PullEngine,
};
use pmpnbp::error::Error;
use pmpnbp::graph::{pattern, GraphTopology, NodeId, Slot};
use pmpnbp::models::GaussianChain;
use pmpnbp::particle::{SeededRng, StateVector, WeightedParticleSet};
use pmpnbp::potentials::{Counting, OpCounters, Potentials};
use pmpnbp::scene::{generate_scene, PatternParams, PatternPotentials, SceneSpec};

fn sv(x: f64) -> StateVector {
    StateVector::new([x])
}

fn flat_chain() -> GaussianChain {
    GaussianChain {
        coupling: 1.0,
        bumps: vec![],
        domain: (-5.0, 5.0),
    }
}

#[test]
fn zero_exploration_copies_a_point_belief() {
    let belief = WeightedParticleSet::uniform(vec![sv(3.5)]);
    let mut explore = |_: &mut SeededRng| sv(-100.0);
    let mut rng = SeededRng::new(1);
    let out = draw_message_locations(&belief, 7, 0.0, Some(&mut explore), &mut rng).unwrap();
    assert_eq!(out, vec![sv(3.5); 7]);
}

#[test]
fn full_exploration_ignores_the_belief() {
    let belief = WeightedParticleSet::uniform(vec![sv(3.5)]);
    let mut explore = |_: &mut SeededRng| sv(-100.0);
    let mut rng = SeededRng::new(2);
    let out = draw_message_locations(&belief, 100, 1.0, Some(&mut explore), &mut rng).unwrap();
    assert_eq!(out.len(), 100);
    assert!(out.iter().all(|p| p[0] == -100.0));
}

#[test]
fn half_exploration_splits_evenly() {
    let belief = WeightedParticleSet::uniform(vec![sv(1.0), sv(2.0)]);
    let mut explore = |_: &mut SeededRng| sv(-100.0);
    let mut rng = SeededRng::new(3);
    let out = draw_message_locations(&belief, 200, 0.5, Some(&mut explore), &mut rng).unwrap();
    let explored = out.iter().filter(|p| p[0] == -100.0).count();
    assert_eq!(explored, 100);
    assert_eq!(out.len() - explored, 100);
    // shuffled, not belief block then explorer block
    assert!(out[..100].iter().any(|p| p[0] == -100.0));
}

#[test]
fn empty_belief_without_explorer_is_rejected() {
    let mut rng = SeededRng::new(4);
    let err = draw_message_locations(&WeightedParticleSet::default(), 5, 0.5, None, &mut rng);
    assert_eq!(err, Err(Error::NoProposal));
}

#[test]
fn leaf_sender_weights_follow_unary() {
    // path 0 - 1; slot 0 -> 1 has no other incoming messages
    let graph = GaussianChain::graph(2);
    let model = GaussianChain {
        coupling: 1e-6,
        bumps: vec![(NodeId(0), 0.0, 1.0)],
        domain: (-5.0, 5.0),
    };
    let locations: Vec<StateVector> = (0..5).map(|i| sv(i as f64 * 0.5)).collect();
    let mut rng = SeededRng::new(5);
    let message = compute_message_weights(
        &graph,
        locations.clone(),
        NodeId(0),
        NodeId(1),
        &BTreeMap::new(),
        &model,
        &mut rng,
    )
    .unwrap();
    // with a near-zero coupling the sender sample sits on the location
    let unary: Vec<f64> = locations.iter().map(|x| model.bump(NodeId(0), x[0])).collect();
    let total: f64 = unary.iter().sum();
    for (w, u) in message.weights().iter().zip(&unary) {
        approx::assert_relative_eq!(*w, u / total, max_relative = 1e-4);
    }
}

#[test]
fn single_component_neighbour_weight_is_the_density() {
    // path 0 - 1 - 2; slot 1 -> 2 reads message 0 -> 1
    let graph = GaussianChain::graph(3);
    let model = flat_chain();
    let anchor = sv(0.7);
    let mut incoming = BTreeMap::new();
    incoming.insert(
        Slot::new(NodeId(0), NodeId(1)),
        WeightedParticleSet::uniform(vec![anchor.clone()]),
    );
    let locations = vec![sv(-1.0), sv(0.0), sv(2.5)];
    let mut rng = SeededRng::new(6);
    let message = compute_message_weights(
        &graph,
        locations.clone(),
        NodeId(1),
        NodeId(2),
        &incoming,
        &model,
        &mut rng,
    )
    .unwrap();
    let psi: Vec<f64> = locations
        .iter()
        .map(|mu| model.pairwise_density(NodeId(1), NodeId(2), &anchor, mu).unwrap())
        .collect();
    let total: f64 = psi.iter().sum();
    for (w, p) in message.weights().iter().zip(&psi) {
        approx::assert_relative_eq!(*w, p / total, max_relative = 1e-12);
    }
}

#[test]
fn missing_incoming_message_is_rejected() {
    let graph = GaussianChain::graph(3);
    let mut rng = SeededRng::new(7);
    let err = compute_message_weights(
        &graph,
        vec![sv(0.0)],
        NodeId(1),
        NodeId(2),
        &BTreeMap::new(),
        &flat_chain(),
        &mut rng,
    );
    assert_eq!(err.unwrap_err(), Error::MissingMessage(NodeId(0), NodeId(1)));
}

#[test]
fn message_weights_cost_d_m_squared_densities() {
    // slot 1 -> 2 on a star where node 1 has three other neighbours
    let spec = pmpnbp::GraphSpec {
        nodes: (0..5)
            .map(|i| (NodeId(i), pmpnbp::NodeKind::Generic { dim: 1 }))
            .collect(),
        edges: vec![
            (NodeId(0), NodeId(1)),
            (NodeId(3), NodeId(1)),
            (NodeId(4), NodeId(1)),
            (NodeId(1), NodeId(2)),
        ],
    };
    let graph = GraphTopology::build(&spec).unwrap();
    let model = Counting::new(flat_chain());
    let m = 40;
    let mut rng = SeededRng::new(8);
    let mut incoming = BTreeMap::new();
    for u in [0, 3, 4] {
        let particles = (0..m).map(|_| model.explore(NodeId(u), &mut rng)).collect();
        incoming.insert(Slot::new(NodeId(u), NodeId(1)), WeightedParticleSet::uniform(particles));
    }
    let locations: Vec<StateVector> = (0..m).map(|_| model.explore(NodeId(2), &mut rng)).collect();
    compute_message_weights(&graph, locations, NodeId(1), NodeId(2), &incoming, &model, &mut rng).unwrap();
    let c = &model.counters;
    assert_eq!(OpCounters::get(&c.pairwise_density), 3 * (m * m) as u64);
    assert_eq!(OpCounters::get(&c.unary), m as u64);
    assert_eq!(OpCounters::get(&c.pairwise_sample), m as u64);
}

#[test]
fn belief_of_single_neighbour_is_resampled_message() {
    let message = WeightedParticleSet::new(vec![sv(1.0), sv(2.0)], vec![0.0, 1.0]).unwrap();
    let mut rng = SeededRng::new(9);
    let belief = update_belief(NodeId(1), &[&message], &flat_chain(), &mut rng).unwrap();
    assert_eq!(belief.weighted, message);
    assert_eq!(belief.samples.particles(), &[sv(2.0), sv(2.0)]);
}

#[test]
fn two_point_messages_pool_at_half_weight() {
    let a = WeightedParticleSet::uniform(vec![sv(-1.0)]);
    let b = WeightedParticleSet::uniform(vec![sv(4.0)]);
    let mut rng = SeededRng::new(10);
    let belief = update_belief(NodeId(1), &[&a, &b], &flat_chain(), &mut rng).unwrap();
    assert_eq!(belief.len(), 2);
    assert_eq!(belief.weighted.weights(), &[0.5, 0.5]);
    assert!(belief.samples.is_normalized());
}

#[test]
fn degenerate_message_propagates_from_belief_update() {
    let model = GaussianChain {
        coupling: 1.0,
        bumps: vec![(NodeId(1), 0.0, 1e-3)],
        domain: (-5.0, 5.0),
    };
    let far = WeightedParticleSet::uniform(vec![sv(100.0)]);
    let mut rng = SeededRng::new(11);
    let err = update_belief(NodeId(1), &[&far], &model, &mut rng);
    assert_eq!(err.unwrap_err(), Error::DegenerateWeights);
}

fn pattern_setup() -> (GraphTopology, PatternPotentials) {
    let graph = pattern::graph();
    let params = PatternParams::default();
    let scene = generate_scene(&SceneSpec::default(), &params);
    let potentials = PatternPotentials::for_scene(&graph, &scene, params);
    (graph, potentials)
}

#[test]
fn belief_sizes_sum_incoming_messages() {
    let (graph, potentials) = pattern_setup();
    let config = EngineConfig {
        particles: 200,
        seed: 3,
        ..EngineConfig::default()
    };
    let mut engine = PullEngine::new(&graph, &potentials, config).unwrap();
    engine.step().unwrap();
    let state = engine.state();
    assert_eq!(state.messages.len(), 16);
    assert!(state.messages.values().all(|m| m.len() == 200));
    assert_eq!(state.beliefs[&pattern::CIRCLE].len(), 800);
    for (i, o) in pattern::INNER.iter().zip(pattern::OUTER) {
        assert_eq!(state.beliefs[i].len(), 400);
        assert_eq!(state.beliefs[&o].len(), 200);
    }
}

#[test]
fn leaf_slot_weights_follow_propagated_unary() {
    let (graph, potentials) = pattern_setup();
    let config = EngineConfig {
        particles: 60,
        seed: 12,
        ..EngineConfig::default()
    };
    let engine = PullEngine::new(&graph, &potentials, config).unwrap();
    let slot = Slot::new(NodeId(9), NodeId(5));
    let mut rng = SeededRng::new(13);
    let message = update_message(&graph, engine.state(), slot, &config, &potentials, &mut rng).unwrap();

    // replay the same stream: locations, then one sender sample per location
    let mut replay = SeededRng::new(13);
    let belief = &engine.state().beliefs[&NodeId(5)].samples;
    let mut explore = |rng: &mut SeededRng| potentials.explore(NodeId(5), rng);
    let locations =
        draw_message_locations(belief, 60, config.explore_fraction, Some(&mut explore), &mut replay).unwrap();
    assert_eq!(message.particles(), &locations[..]);
    let unary: Vec<f64> = locations
        .iter()
        .map(|mu| {
            let x = potentials
                .pairwise_sample(NodeId(5), NodeId(9), mu, &mut replay)
                .unwrap();
            potentials.unary(NodeId(9), &x)
        })
        .collect();
    let total: f64 = unary.iter().sum();
    for (w, u) in message.weights().iter().zip(&unary) {
        approx::assert_relative_eq!(*w, u / total, max_relative = 1e-12);
    }
}

#[test]
fn zero_iterations_hold_only_the_initialization() {
    let graph = GaussianChain::graph(3);
    let config = EngineConfig {
        particles: 10,
        iterations: 0,
        ..EngineConfig::default()
    };
    let trace = run_inference(&graph, &flat_chain(), config).unwrap();
    assert_eq!(trace.records.len(), 1);
    assert_eq!(trace.records[0].iteration, 0);
}

#[test]
fn identical_seeds_give_identical_messages() {
    let (graph, potentials) = pattern_setup();
    let config = EngineConfig {
        particles: 30,
        explore_fraction: 0.0,
        seed: 21,
        ..EngineConfig::default()
    };
    let run = || {
        let mut engine = PullEngine::new(&graph, &potentials, config).unwrap();
        engine.step().unwrap();
        engine.step().unwrap();
        (engine.state().messages.clone(), engine.state().beliefs.clone())
    };
    assert_eq!(run(), run());
}

#[test]
fn parallel_matches_sequential() {
    let (graph, potentials) = pattern_setup();
    let base = EngineConfig {
        particles: 30,
        iterations: 3,
        seed: 22,
        ..EngineConfig::default()
    };
    let sequential = run_inference(&graph, &potentials, base).unwrap();
    let parallel = run_inference(&graph, &potentials, EngineConfig { parallel: true, ..base }).unwrap();
    for (a, b) in sequential.records.iter().zip(&parallel.records) {
        assert_eq!(a.beliefs, b.beliefs);
    }
}

#[test]
fn slot_update_order_does_not_matter() {
    let (graph, potentials) = pattern_setup();
    let config = EngineConfig {
        particles: 25,
        seed: 23,
        ..EngineConfig::default()
    };
    let engine = PullEngine::new(&graph, &potentials, config).unwrap();
    let slots = graph.slots();
    let update = |k: usize| {
        let mut rng = SeededRng::stream(99, k as u64);
        update_message(&graph, engine.state(), slots[k], &config, &potentials, &mut rng).unwrap()
    };
    let forward: Vec<_> = (0..slots.len()).map(update).collect();
    let mut backward: Vec<_> = (0..slots.len()).rev().map(update).collect();
    backward.reverse();
    assert_eq!(forward, backward);
}

#[test]
fn weights_stay_normalized() {
    let (graph, potentials) = pattern_setup();
    let config = EngineConfig {
        particles: 40,
        seed: 24,
        ..EngineConfig::default()
    };
    let mut engine = PullEngine::new(&graph, &potentials, config).unwrap();
    for _ in 0..3 {
        engine.step().unwrap();
        let state = engine.state();
        assert!(state.messages.values().all(|m| m.is_normalized()));
        for belief in state.beliefs.values() {
            assert!(belief.samples.is_normalized());
            assert!(belief.weighted.is_normalized());
        }
    }
}

/// Pattern potentials whose prior is a point mass at the ground truth.
struct TruthPrior<'a> {
    inner: &'a PatternPotentials,
    truth: &'a BTreeMap<NodeId, StateVector>,
}

impl Potentials for TruthPrior<'_> {
    fn unary(&self, node: NodeId, state: &StateVector) -> f64 {
        self.inner.unary(node, state)
    }

    fn pairwise_sample(
        &self,
        given: NodeId,
        target: NodeId,
        given_state: &StateVector,
        rng: &mut SeededRng,
    ) -> pmpnbp::Result<StateVector> {
        self.inner.pairwise_sample(given, target, given_state, rng)
    }

    fn pairwise_density(
        &self,
        given: NodeId,
        target: NodeId,
        given_state: &StateVector,
        target_state: &StateVector,
    ) -> pmpnbp::Result<f64> {
        self.inner.pairwise_density(given, target, given_state, target_state)
    }

    fn explore(&self, node: NodeId, rng: &mut SeededRng) -> StateVector {
        self.inner.explore(node, rng)
    }

    fn prior(&self, node: NodeId, count: usize, _: &mut SeededRng) -> Vec<StateVector> {
        vec![self.truth[&node].clone(); count]
    }

    fn perturb(&self, node: NodeId, state: &StateVector, scale: f64, rng: &mut SeededRng) -> StateVector {
        self.inner.perturb(node, state, scale, rng)
    }
}

#[test]
fn point_mass_at_truth_drifts_less_than_sigma_p() {
    let graph = pattern::graph();
    let params = PatternParams::default();
    let scene = generate_scene(&SceneSpec::default(), &params);
    let inner = PatternPotentials::for_scene(&graph, &scene, params);
    let potentials = TruthPrior {
        inner: &inner,
        truth: &scene.truth,
    };
    let config = EngineConfig {
        particles: 50,
        explore_fraction: 0.0,
        iterations: 5,
        seed: 25,
        ..EngineConfig::default()
    };
    let trace = run_inference(&graph, &potentials, config).unwrap();
    for pair in trace.records.windows(2) {
        let (before, after) = (pair[0].mles(), pair[1].mles());
        for (node, a) in &after {
            let b = &before[node];
            let drift = (a[0] - b[0]).hypot(a[1] - b[1]);
            assert!(
                drift < params.sigma_p,
                "node {node} drifted {drift:.2} px at iteration {}",
                pair[1].iteration
            );
        }
    }
}

#[test]
fn identity_perturbation_keeps_copies() {
    // the chain model has no perturbation, so roughening is inert
    let graph = GaussianChain::graph(2);
    let model = flat_chain();
    let config = |roughening| EngineConfig {
        particles: 20,
        iterations: 2,
        roughening,
        seed: 26,
        ..EngineConfig::default()
    };
    let a = run_inference(&graph, &model, config(0.0)).unwrap();
    let b = run_inference(&graph, &model, config(2.0)).unwrap();
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.beliefs, y.beliefs);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let graph = GaussianChain::graph(2);
    let model = flat_chain();
    for bad in [
        EngineConfig {
            particles: 0,
            ..EngineConfig::default()
        },
        EngineConfig {
            explore_fraction: 1.5,
            ..EngineConfig::default()
        },
        EngineConfig {
            roughening: -1.0,
            ..EngineConfig::default()
        },
    ] {
        assert!(matches!(
            PullEngine::new(&graph, &model, bad),
            Err(Error::InvalidConfig(_))
        ));
    }
}
