//! Linear networks of invertible nodes.
//!
//! Node 0 is the source, nodes `1..=c` are the intermediate nodes in
//! processing order and node `c + 1` is the sink. An edge is a `(tail, head)`
//! pair; edge IDs are list positions. The source feeds its out-edges, and the
//! sink reads its in-edges, in increasing edge ID order. Node `t` maps the
//! symbols on `in_ports` (in that order) through `A_t` onto `out_ports`.
//!
//! Values are propagated as whole matrices: one row per edge, one column per
//! channel use. An injection on an attacked edge is added after the value is
//! produced and before the head node consumes it.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Embedding, FieldError, FieldSpec};
use crate::linalg::{sample_invertible, LinalgError, Matrix};

const FIG1_JSON: &str = include_str!("../fixtures/fig1_network.json");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("malformed network description: {0}")]
    Format(String),
    #[error("invalid network: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("expected {expected}, found {found}")]
    Shape { expected: String, found: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// A broken structural rule, reported by [`NetworkSpec::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EdgeEndpoint { edge: usize, tail: usize, head: usize },
    NotForward { edge: usize, tail: usize, head: usize },
    SourceDegree { expected: usize, found: usize },
    SinkDegree { expected: usize, found: usize },
    NodeDegree { node: usize, k: usize, incoming: usize, outgoing: usize },
    PortMismatch { node: usize, side: &'static str },
    MatrixShape { node: usize, k: usize, rows: usize, cols: usize },
    FieldMismatch { node: usize },
    SingularNode { node: usize },
    AttackedEdge { edge: usize },
    DuplicateAttack { edge: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EdgeEndpoint { edge, tail, head } => {
                write!(f, "edge {edge} ({tail}->{head}) has an endpoint outside the node range")
            }
            Violation::NotForward { edge, tail, head } => {
                write!(f, "edge {edge} ({tail}->{head}) does not follow the processing order")
            }
            Violation::SourceDegree { expected, found } => {
                write!(f, "source has {found} outgoing edges, expected {expected}")
            }
            Violation::SinkDegree { expected, found } => {
                write!(f, "sink has {found} incoming edges, expected {expected}")
            }
            Violation::NodeDegree { node, k, incoming, outgoing } => write!(
                f,
                "node {node} declares k={k} but has {incoming} incoming and {outgoing} outgoing edges"
            ),
            Violation::PortMismatch { node, side } => {
                write!(f, "node {node}: {side} ports do not list its {side} edges")
            }
            Violation::MatrixShape { node, k, rows, cols } => {
                write!(f, "node {node}: matrix is {rows}x{cols}, expected {k}x{k}")
            }
            Violation::FieldMismatch { node } => write!(f, "node {node}: matrix over the wrong field"),
            Violation::SingularNode { node } => write!(f, "node {node}: matrix is singular"),
            Violation::AttackedEdge { edge } => write!(f, "attacked edge {edge} does not exist"),
            Violation::DuplicateAttack { edge } => write!(f, "edge {edge} is attacked twice"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDesc {
    pub p: u64,
    pub d: u32,
}

impl FieldDesc {
    pub fn build(&self) -> Result<FieldSpec, FieldError> {
        FieldSpec::new(self.p, self.d)
    }

    pub fn of(field: &FieldSpec) -> Self {
        Self {
            p: field.characteristic(),
            d: field.degree(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub k: usize,
    pub matrix: Matrix,
    pub in_ports: Vec<usize>,
    pub out_ports: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub field: FieldSpec,
    pub m0: usize,
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<(usize, usize)>,
    pub attacked: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    k: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<u64>>,
    in_ports: Vec<usize>,
    out_ports: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkJson {
    q: FieldDesc,
    m0: usize,
    nodes: Vec<NodeJson>,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    attacked: Vec<usize>,
}

/// Matrices describing a network's linear action for one choice of node maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transfer {
    /// Sink output for unit source inputs (m0 x m0).
    pub k: Matrix,
    /// Sink output for unit injections on the attacked edges (m0 x m_a).
    pub w: Matrix,
    /// Uninjected values on the attacked edges for unit source inputs (m_a x m0).
    pub tap: Matrix,
}

impl NetworkSpec {
    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let raw: NetworkJson =
            serde_json::from_str(text).map_err(|e| NetworkError::Format(e.to_string()))?;
        let field = raw.q.build()?;
        let nodes = raw
            .nodes
            .into_iter()
            .map(|n| {
                Ok(NodeSpec {
                    k: n.k,
                    matrix: Matrix::from_rows(&field, &n.a)?,
                    in_ports: n.in_ports,
                    out_ports: n.out_ports,
                })
            })
            .collect::<Result<Vec<_>, NetworkError>>()?;
        Ok(Self {
            field,
            m0: raw.m0,
            nodes,
            edges: raw.edges.into_iter().map(|[t, h]| (t, h)).collect(),
            attacked: raw.attacked,
        })
    }

    pub fn to_json(&self) -> String {
        let raw = NetworkJson {
            q: FieldDesc::of(&self.field),
            m0: self.m0,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeJson {
                    k: n.k,
                    a: n.matrix.to_rows(),
                    in_ports: n.in_ports.clone(),
                    out_ports: n.out_ports.clone(),
                })
                .collect(),
            edges: self.edges.iter().map(|&(t, h)| [t, h]).collect(),
            attacked: self.attacked.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("network serializes")
    }

    /// The three-node, 14-edge network over GF(7) with `m0 = 6`, attacked on
    /// the first source edge into `v1`.
    pub fn fig1() -> Self {
        Self::from_json(FIG1_JSON).expect("bundled fixture parses")
    }

    /// `m0` direct source-to-sink edges.
    pub fn parallel(field: &FieldSpec, m0: usize) -> Self {
        Self {
            field: field.clone(),
            m0,
            nodes: Vec::new(),
            edges: vec![(0, 1); m0],
            attacked: Vec::new(),
        }
    }

    pub fn with_attacked(mut self, attacked: Vec<usize>) -> Self {
        self.attacked = attacked;
        self
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn sink(&self) -> usize {
        self.nodes.len() + 1
    }

    /// Number of attacked edges.
    pub fn m_a(&self) -> usize {
        self.attacked.len()
    }

    pub fn source_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].0 == 0).collect()
    }

    pub fn sink_edges(&self) -> Vec<usize> {
        let sink = self.sink();
        (0..self.edges.len()).filter(|&e| self.edges[e].1 == sink).collect()
    }

    /// Whether the attack set fits an adversary budget of `m1` edges.
    pub fn within_budget(&self, m1: usize) -> bool {
        self.attacked.len() <= m1
    }

    /// Every structural violation; empty when the network is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let sink = self.sink();
        for (edge, &(tail, head)) in self.edges.iter().enumerate() {
            if tail > sink || head > sink {
                out.push(Violation::EdgeEndpoint { edge, tail, head });
            } else if tail >= head {
                out.push(Violation::NotForward { edge, tail, head });
            }
        }
        let src = self.source_edges().len();
        if src != self.m0 {
            out.push(Violation::SourceDegree { expected: self.m0, found: src });
        }
        let snk = self.sink_edges().len();
        if snk != self.m0 {
            out.push(Violation::SinkDegree { expected: self.m0, found: snk });
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let t = i + 1;
            let incoming: Vec<usize> = (0..self.edges.len()).filter(|&e| self.edges[e].1 == t).collect();
            let outgoing: Vec<usize> = (0..self.edges.len()).filter(|&e| self.edges[e].0 == t).collect();
            if incoming.len() != node.k || outgoing.len() != node.k {
                out.push(Violation::NodeDegree {
                    node: t,
                    k: node.k,
                    incoming: incoming.len(),
                    outgoing: outgoing.len(),
                });
            }
            if !same_set(&node.in_ports, &incoming) {
                out.push(Violation::PortMismatch { node: t, side: "incoming" });
            }
            if !same_set(&node.out_ports, &outgoing) {
                out.push(Violation::PortMismatch { node: t, side: "outgoing" });
            }
            let (rows, cols) = node.matrix.shape();
            if node.matrix.field() != &self.field {
                out.push(Violation::FieldMismatch { node: t });
            } else if rows != node.k || cols != node.k {
                out.push(Violation::MatrixShape { node: t, k: node.k, rows, cols });
            } else if !node.matrix.is_invertible() {
                out.push(Violation::SingularNode { node: t });
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for &edge in &self.attacked {
            if edge >= self.edges.len() {
                out.push(Violation::AttackedEdge { edge });
            } else if !seen.insert(edge) {
                out.push(Violation::DuplicateAttack { edge });
            }
        }
        out
    }

    pub fn check(&self) -> Result<(), NetworkError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(NetworkError::Invalid(v))
        }
    }

    /// Pushes `input` (m0 x n, one row per source edge) through the network
    /// using `maps[t]` at node `t + 1`, with an optional injection
    /// (m_a x n, one row per attacked edge). Returns the sink output and the
    /// uninjected values seen on the attacked edges.
    pub fn propagate(
        &self,
        maps: &[Matrix],
        input: &Matrix,
        injection: Option<&Matrix>,
    ) -> Result<(Matrix, Matrix), NetworkError> {
        self.check()?;
        let n = input.cols();
        if input.rows() != self.m0 {
            return Err(NetworkError::Shape {
                expected: format!("{} input rows", self.m0),
                found: format!("{}", input.rows()),
            });
        }
        if let Some(z) = injection {
            if z.shape() != (self.m_a(), n) {
                return Err(NetworkError::Shape {
                    expected: format!("{}x{} injection", self.m_a(), n),
                    found: format!("{}x{}", z.rows(), z.cols()),
                });
            }
        }
        let f = input.field();
        let mut values: Vec<Option<Matrix>> = vec![None; self.edges.len()];
        let mut taps = Matrix::zeros(f, self.m_a(), n);
        let mut emit = |edge: usize, mut v: Matrix, values: &mut Vec<Option<Matrix>>| -> Result<(), NetworkError> {
            if let Some(j) = self.attacked.iter().position(|&a| a == edge) {
                taps.set_block(j, 0, &v);
                if let Some(z) = injection {
                    v = v.add(&z.row_range(j, j + 1))?;
                }
            }
            values[edge] = Some(v);
            Ok(())
        };
        for (i, e) in self.source_edges().into_iter().enumerate() {
            emit(e, input.row_range(i, i + 1), &mut values)?;
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let parts: Vec<Matrix> = node
                .in_ports
                .iter()
                .map(|&e| values[e].take().expect("tail processed before head"))
                .collect();
            let refs: Vec<&Matrix> = parts.iter().collect();
            let stacked = Matrix::vstack(&refs)?;
            let produced = maps[i].mul(&stacked)?;
            for (r, &e) in node.out_ports.iter().enumerate() {
                emit(e, produced.row_range(r, r + 1), &mut values)?;
            }
        }
        let outs: Vec<Matrix> = self
            .sink_edges()
            .into_iter()
            .map(|e| values[e].take().expect("sink edge carries a value"))
            .collect();
        let refs: Vec<&Matrix> = outs.iter().collect();
        let sink = if refs.is_empty() {
            Matrix::zeros(f, 0, n)
        } else {
            Matrix::vstack(&refs)?
        };
        Ok((sink, taps))
    }

    fn transfer(&self, maps: &[Matrix]) -> Result<Transfer, NetworkError> {
        let f = &self.field;
        let (k, tap) = self.propagate(maps, &Matrix::identity(f, self.m0), None)?;
        let ma = self.m_a();
        let (w, _) = self.propagate(
            maps,
            &Matrix::zeros(f, self.m0, ma),
            Some(&Matrix::identity(f, ma)),
        )?;
        Ok(Transfer { k, w, tap })
    }

    fn bit_maps(&self) -> Vec<Matrix> {
        self.nodes.iter().map(|n| n.matrix.clone()).collect()
    }

    fn phase_maps(&self) -> Result<Vec<Matrix>, NetworkError> {
        self.nodes
            .iter()
            .map(|n| Ok(n.matrix.phase_transform()?))
            .collect()
    }

    /// Transfer, injection and tap matrices for bit-basis symbols.
    pub fn bit_side(&self) -> Result<Transfer, NetworkError> {
        self.check()?;
        self.transfer(&self.bit_maps())
    }

    /// The same for phase-basis labels, which pass node `t` as `[A_t]_p`.
    pub fn phase_side(&self) -> Result<Transfer, NetworkError> {
        self.check()?;
        self.transfer(&self.phase_maps()?)
    }

    pub fn bit_transfer(&self) -> Result<Matrix, NetworkError> {
        Ok(self.bit_side()?.k)
    }

    pub fn bit_injection(&self) -> Result<Matrix, NetworkError> {
        Ok(self.bit_side()?.w)
    }

    /// `(K_p, W_p)`; `K_p` always equals `[K]_p`.
    pub fn phase_transfer(&self) -> Result<(Matrix, Matrix), NetworkError> {
        let t = self.phase_side()?;
        Ok((t.k, t.w))
    }

    /// The same network with node matrices embedded into `target`.
    pub fn extend_field(&self, target: &FieldSpec) -> Result<NetworkSpec, NetworkError> {
        let e = Embedding::new(&self.field, target)?;
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                Ok(NodeSpec {
                    matrix: n.matrix.embed(&e)?,
                    ..n.clone()
                })
            })
            .collect::<Result<Vec<_>, NetworkError>>()?;
        Ok(NetworkSpec {
            field: target.clone(),
            nodes,
            ..self.clone()
        })
    }
}

fn same_set(a: &[usize], b: &[usize]) -> bool {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_unstable();
    y.sort_unstable();
    x == y
}

/// Seeded random network with `c` intermediate nodes.
///
/// Each node draws `k_t` uniformly from `1..=m0`, consumes that many of the
/// currently open edges (chosen uniformly) and opens as many new ones. Ports
/// follow increasing edge ID, and the open edges left at the end go to
/// the sink. No edges are attacked.
pub fn random_network(seed: u64, m0: usize, c: usize, field: &FieldSpec) -> NetworkSpec {
    use rand::seq::SliceRandom;
    use rand::Rng;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sink = c + 1;
    // Tails of all edges created so far; heads are filled in on consumption.
    let mut edges: Vec<(usize, usize)> = (0..m0).map(|_| (0, usize::MAX)).collect();
    let mut open: Vec<usize> = (0..m0).collect();
    let mut nodes = Vec::with_capacity(c);
    for t in 1..=c {
        let k = rng.gen_range(1..=m0);
        open.shuffle(&mut rng);
        let mut consumed: Vec<usize> = open.drain(..k).collect();
        consumed.sort_unstable();
        for &e in &consumed {
            edges[e].1 = t;
        }
        let produced: Vec<usize> = (edges.len()..edges.len() + k).collect();
        edges.extend(std::iter::repeat_n((t, usize::MAX), k));
        open.extend(&produced);
        open.sort_unstable();
        nodes.push(NodeSpec {
            k,
            matrix: sample_invertible(field, k, &mut rng),
            in_ports: consumed,
            out_ports: produced,
        });
    }
    for e in open {
        edges[e].1 = sink;
    }
    NetworkSpec {
        field: field.clone(),
        m0,
        nodes,
        edges,
        attacked: Vec::new(),
    }
}
