//! Fixed-topology neural controllers with a flat trainable parameter view.
//!
//! Networks consist of identity buffer neurons (inputs) and tanh neurons.
//! All edges carry a one-step delay: a synchronous update computes every
//! tanh activation from the previous activation vector, then replaces the
//! buffer activations with the presented inputs. Trainable scalars live in
//! slots `0..P`; several edges may reference the same slot (weight
//! sharing), which is how the six-leg gait controller stays at 32
//! parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Flat trainable parameter vector of a controller.
pub type ParameterVector = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeuronKind {
    /// Identity buffer; holds the last presented input, no bias, no
    /// incoming edges.
    InputBuffer,
    /// Hyperbolic tangent unit with a bias slot.
    Tanh,
}

/// A weighted directed connection reading the source's previous activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub slot: usize,
}

/// Immutable wiring diagram of a controller.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkTopology {
    neuron_kinds: Vec<NeuronKind>,
    edges: Vec<Edge>,
    /// One entry per neuron; `Some(slot)` for tanh neurons.
    bias_slots: Vec<Option<usize>>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    slot_count: usize,
}

impl NetworkTopology {
    pub fn new(
        neuron_kinds: Vec<NeuronKind>,
        edges: Vec<Edge>,
        bias_slots: Vec<Option<usize>>,
        inputs: Vec<usize>,
        outputs: Vec<usize>,
    ) -> Result<Self> {
        let n = neuron_kinds.len();
        if bias_slots.len() != n {
            return Err(Error::InvalidConfig(
                "bias slot list must have one entry per neuron".into(),
            ));
        }
        if outputs.is_empty() {
            return Err(Error::InvalidConfig("output neuron list is empty".into()));
        }
        for (i, kind) in neuron_kinds.iter().enumerate() {
            match kind {
                NeuronKind::InputBuffer => {
                    if bias_slots[i].is_some() {
                        return Err(Error::InvalidConfig(format!(
                            "buffer neuron {i} must not carry a bias"
                        )));
                    }
                }
                NeuronKind::Tanh => {
                    if bias_slots[i].is_none() {
                        return Err(Error::InvalidConfig(format!(
                            "tanh neuron {i} is missing its bias slot"
                        )));
                    }
                }
            }
        }
        for e in &edges {
            if e.source >= n || e.target >= n {
                return Err(Error::InvalidConfig(format!(
                    "edge {} -> {} references a missing neuron",
                    e.source, e.target
                )));
            }
            if neuron_kinds[e.target] == NeuronKind::InputBuffer {
                return Err(Error::InvalidConfig(format!(
                    "buffer neuron {} must not have incoming edges",
                    e.target
                )));
            }
        }
        for &i in inputs.iter().chain(outputs.iter()) {
            if i >= n {
                return Err(Error::InvalidConfig(format!(
                    "input/output list references missing neuron {i}"
                )));
            }
        }
        if inputs
            .iter()
            .any(|&i| neuron_kinds[i] != NeuronKind::InputBuffer)
        {
            return Err(Error::InvalidConfig(
                "input list must contain buffer neurons only".into(),
            ));
        }
        // Slot ids must form a contiguous 0..P range.
        let mut used: Vec<bool> = Vec::new();
        let mark = |slot: usize, used: &mut Vec<bool>| {
            if slot >= used.len() {
                used.resize(slot + 1, false);
            }
            used[slot] = true;
        };
        for e in &edges {
            mark(e.slot, &mut used);
        }
        for b in bias_slots.iter().flatten() {
            mark(*b, &mut used);
        }
        if let Some(missing) = used.iter().position(|&u| !u) {
            return Err(Error::InvalidConfig(format!(
                "slot ids are not contiguous: slot {missing} is unused"
            )));
        }
        Ok(Self {
            slot_count: used.len(),
            neuron_kinds,
            edges,
            bias_slots,
            inputs,
            outputs,
        })
    }

    /// Number of trainable scalars.
    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    pub fn neuron_count(&self) -> usize {
        self.neuron_kinds.len()
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Structured text description (neuron kinds, edges, slot ids) for
    /// reproducibility archives.
    pub fn describe(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serialization cannot fail")
    }
}

/// A topology bound to concrete parameters plus its per-episode activation
/// state.
#[derive(Debug, Clone)]
pub struct NeuralPolicy {
    topology: NetworkTopology,
    params: Vec<f64>,
    activations: Vec<f64>,
}

impl NeuralPolicy {
    /// Wraps a topology with all parameters and activations at zero.
    pub fn new(topology: NetworkTopology) -> Self {
        let params = vec![0.0; topology.slot_count()];
        let activations = vec![0.0; topology.neuron_count()];
        Self {
            topology,
            params,
            activations,
        }
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn input_count(&self) -> usize {
        self.topology.input_count()
    }

    pub fn output_count(&self) -> usize {
        self.topology.output_count()
    }

    /// Installs a full parameter vector. Slots shared between edges see the
    /// same scalar by construction.
    pub fn bind_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.topology.slot_count() {
            return Err(Error::InputMismatch(format!(
                "expected {} parameters, got {}",
                self.topology.slot_count(),
                params.len()
            )));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    pub fn read_parameters(&self) -> ParameterVector {
        self.params.clone()
    }

    /// Clears all activations; call between episodes.
    pub fn reset(&mut self) {
        self.activations.iter_mut().for_each(|a| *a = 0.0);
    }

    /// One synchronous network update.
    ///
    /// Tanh neurons read the previous activation vector (one-step delay on
    /// every edge); buffer neurons then take the presented inputs verbatim.
    /// Returns the post-update activations of the output neurons.
    pub fn step(&mut self, inputs: &[f64]) -> Result<Vec<f64>> {
        let topo = &self.topology;
        if inputs.len() != topo.inputs.len() {
            return Err(Error::InputMismatch(format!(
                "expected {} inputs, got {}",
                topo.inputs.len(),
                inputs.len()
            )));
        }
        let mut next = vec![0.0; self.activations.len()];
        for (i, kind) in topo.neuron_kinds.iter().enumerate() {
            if *kind == NeuronKind::Tanh {
                next[i] = self.params[topo.bias_slots[i].expect("validated")];
            }
        }
        for e in &topo.edges {
            next[e.target] += self.params[e.slot] * self.activations[e.source];
        }
        for (i, kind) in topo.neuron_kinds.iter().enumerate() {
            if *kind == NeuronKind::Tanh {
                next[i] = next[i].tanh();
            }
        }
        for (pos, &neuron) in topo.inputs.iter().enumerate() {
            next[neuron] = inputs[pos];
        }
        self.activations = next;
        Ok(topo.outputs.iter().map(|&o| self.activations[o]).collect())
    }
}

/// Cart-pole controller architectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CartPoleVariant {
    /// Compact direct topology: 4 inputs wired straight to the single tanh
    /// output, which carries a self-connection.
    A,
    /// 4 fully connected tanh hidden neurons feeding the output.
    B,
    /// Variant B plus recurrent self-connections on the hidden neurons.
    C,
    /// Variant C plus directed lateral connections between hidden neurons.
    D,
}

impl std::str::FromStr for CartPoleVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Self::A),
            "B" | "b" => Ok(Self::B),
            "C" | "c" => Ok(Self::C),
            "D" | "d" => Ok(Self::D),
            other => Err(Error::InvalidConfig(format!(
                "unknown cart-pole controller variant '{other}' (expected A, B, C or D)"
            ))),
        }
    }
}

/// Builds a cart-pole controller: 4 buffer inputs (x, x', theta, theta')
/// and one tanh output whose activation is scaled to a force by the
/// environment.
pub fn build_cartpole_controller(variant: CartPoleVariant) -> NetworkTopology {
    let mut slot = 0;
    let mut next_slot = || {
        let s = slot;
        slot += 1;
        s
    };
    let inputs: Vec<usize> = (0..4).collect();
    let mut kinds = vec![NeuronKind::InputBuffer; 4];
    let mut edges = Vec::new();

    let topology = match variant {
        CartPoleVariant::A => {
            kinds.push(NeuronKind::Tanh); // neuron 4: output
            for src in 0..4 {
                edges.push(Edge {
                    source: src,
                    target: 4,
                    slot: next_slot(),
                });
            }
            edges.push(Edge {
                source: 4,
                target: 4,
                slot: next_slot(),
            });
            let mut bias = vec![None; 4];
            bias.push(Some(next_slot()));
            NetworkTopology::new(kinds, edges, bias, inputs, vec![4])
        }
        CartPoleVariant::B | CartPoleVariant::C | CartPoleVariant::D => {
            kinds.extend([NeuronKind::Tanh; 4]); // neurons 4..8: hidden
            kinds.push(NeuronKind::Tanh); // neuron 8: output
            let hidden = 4..8;
            for h in hidden.clone() {
                for src in 0..4 {
                    edges.push(Edge {
                        source: src,
                        target: h,
                        slot: next_slot(),
                    });
                }
            }
            if matches!(variant, CartPoleVariant::C | CartPoleVariant::D) {
                for h in hidden.clone() {
                    edges.push(Edge {
                        source: h,
                        target: h,
                        slot: next_slot(),
                    });
                }
            }
            if variant == CartPoleVariant::D {
                for h in hidden.clone() {
                    for other in hidden.clone() {
                        if h != other {
                            edges.push(Edge {
                                source: h,
                                target: other,
                                slot: next_slot(),
                            });
                        }
                    }
                }
            }
            for h in hidden.clone() {
                edges.push(Edge {
                    source: h,
                    target: 8,
                    slot: next_slot(),
                });
            }
            let mut bias = vec![None; 4];
            for _ in hidden {
                bias.push(Some(next_slot()));
            }
            bias.push(Some(next_slot()));
            NetworkTopology::new(kinds, edges, bias, inputs, vec![8])
        }
    };
    topology.expect("cart-pole topologies are valid by construction")
}

/// Number of shared trainable slots in the six-leg gait controller.
pub const CPG_SLOT_COUNT: usize = 32;

// Shared slot layout of the leg module (identical for all six legs):
//   0..6   local sensor weights (ThC angle, FTi angle, contact) x 2 motors
//   6..10  intra-leg motor recurrence (2 x 2)
//  10..12  motor biases
//  12..16  forward ipsilateral neighbour motors -> own motors (2 x 2)
//  16..20  backward ipsilateral neighbour motors -> own motors (2 x 2)
//  20..24  contralateral partner motors -> own motors (2 x 2)
//  24..28  contralateral partner angle buffers -> own motors (2 x 2)
//  28..32  ipsilateral neighbour contact buffers -> own motors (2 x 2)
const CPG_LOCAL: usize = 0;
const CPG_RECURRENT: usize = 6;
const CPG_BIAS: usize = 10;
const CPG_FORWARD: usize = 12;
const CPG_BACKWARD: usize = 16;
const CPG_CONTRA: usize = 20;
const CPG_CONTRA_SENSE: usize = 24;
const CPG_PHASE: usize = 28;

/// Builds the six-leg gait controller: one leg module (3 sensor buffers,
/// 2 tanh motor neurons) replicated six times, all referencing the same 32
/// slots. Legs 0..3 form the left chain, legs 3..6 the right chain; leg i
/// is coupled to its in-chain neighbours and to its contralateral partner
/// i +/- 3.
///
/// Inputs are ordered as the crawler's sensor vector: 12 joint angles
/// (ThC, FTi per leg) followed by 6 contact flags. Outputs are the 12
/// motor neurons in (ThC, FTi) per-leg order.
pub fn build_hexapod_cpg() -> NetworkTopology {
    let legs = 6;
    // Neuron ids: per leg 5 neurons [bufThC, bufFTi, bufContact, motThC, motFTi].
    let buf_thc = |leg: usize| leg * 5;
    let buf_fti = |leg: usize| leg * 5 + 1;
    let buf_contact = |leg: usize| leg * 5 + 2;
    let motor = |leg: usize, m: usize| leg * 5 + 3 + m;

    let mut kinds = Vec::new();
    let mut bias = Vec::new();
    for _ in 0..legs {
        kinds.extend([
            NeuronKind::InputBuffer,
            NeuronKind::InputBuffer,
            NeuronKind::InputBuffer,
            NeuronKind::Tanh,
            NeuronKind::Tanh,
        ]);
        bias.extend([None, None, None, Some(CPG_BIAS), Some(CPG_BIAS + 1)]);
    }

    let mut edges = Vec::new();
    for leg in 0..legs {
        let side_base = (leg / 3) * 3;
        let within = leg % 3;
        let forward_neighbor = side_base + (within + 1) % 3;
        let backward_neighbor = side_base + (within + 2) % 3;
        let partner = (leg + 3) % 6;

        for m in 0..2 {
            for (i, src) in [buf_thc(leg), buf_fti(leg), buf_contact(leg)]
                .into_iter()
                .enumerate()
            {
                edges.push(Edge {
                    source: src,
                    target: motor(leg, m),
                    slot: CPG_LOCAL + i * 2 + m,
                });
            }
            for s in 0..2 {
                edges.push(Edge {
                    source: motor(leg, s),
                    target: motor(leg, m),
                    slot: CPG_RECURRENT + s * 2 + m,
                });
                edges.push(Edge {
                    source: motor(forward_neighbor, s),
                    target: motor(leg, m),
                    slot: CPG_FORWARD + s * 2 + m,
                });
                edges.push(Edge {
                    source: motor(backward_neighbor, s),
                    target: motor(leg, m),
                    slot: CPG_BACKWARD + s * 2 + m,
                });
                edges.push(Edge {
                    source: motor(partner, s),
                    target: motor(leg, m),
                    slot: CPG_CONTRA + s * 2 + m,
                });
            }
            for (i, src) in [buf_thc(partner), buf_fti(partner)].into_iter().enumerate() {
                edges.push(Edge {
                    source: src,
                    target: motor(leg, m),
                    slot: CPG_CONTRA_SENSE + i * 2 + m,
                });
            }
            for (i, src) in [buf_contact(forward_neighbor), buf_contact(backward_neighbor)]
                .into_iter()
                .enumerate()
            {
                edges.push(Edge {
                    source: src,
                    target: motor(leg, m),
                    slot: CPG_PHASE + i * 2 + m,
                });
            }
        }
    }

    let mut inputs = Vec::with_capacity(18);
    for leg in 0..legs {
        inputs.push(buf_thc(leg));
        inputs.push(buf_fti(leg));
    }
    for leg in 0..legs {
        inputs.push(buf_contact(leg));
    }
    let mut outputs = Vec::with_capacity(12);
    for leg in 0..legs {
        outputs.push(motor(leg, 0));
        outputs.push(motor(leg, 1));
    }

    NetworkTopology::new(kinds, edges, bias, inputs, outputs)
        .expect("gait controller topology is valid by construction")
}

/// Number of trainable scalars in the self-rescue controller.
pub const RESCUE_SLOT_COUNT: usize = 156;

/// Builds the self-rescue controller: 12 joint-angle buffers fully
/// connected to 12 tanh outputs, no recurrence, no lateral connections.
/// 144 weights plus 12 biases.
pub fn build_rescue_controller() -> NetworkTopology {
    let mut kinds = vec![NeuronKind::InputBuffer; 12];
    kinds.extend([NeuronKind::Tanh; 12]);
    let mut edges = Vec::with_capacity(144);
    for out in 0..12 {
        for src in 0..12 {
            edges.push(Edge {
                source: src,
                target: 12 + out,
                slot: out * 12 + src,
            });
        }
    }
    let mut bias = vec![None; 12];
    for out in 0..12 {
        bias.push(Some(144 + out));
    }
    let inputs: Vec<usize> = (0..12).collect();
    let outputs: Vec<usize> = (12..24).collect();
    NetworkTopology::new(kinds, edges, bias, inputs, outputs)
        .expect("rescue topology is valid by construction")
}
