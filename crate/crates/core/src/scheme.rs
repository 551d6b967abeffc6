//! Coding schemes for relay-based body sensor networks.
//!
//! `n` sensors each emit one packet per round. The `k` relays listen to
//! overlapping windows of `t = s*r` consecutive packets (`s = n/k`), and each
//! forwards `t` encoded slots, so every packet reaches the sink through `r`
//! relays. A slot carries either one packet in the clear or the XOR of two
//! packets from the relay's window.
//!
//! Packets are numbered `1..=n` with wraparound `((x-1) mod n) + 1`; relays
//! and slots are 0-based. Relay `j`'s window starts at packet `j*s + 1`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multigraph::{Edge, MultiGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemeError {
    #[error("parameters must be positive (n={n}, k={k}, r={r})")]
    NonPositive { n: usize, k: usize, r: usize },
    #[error("relay count {k} must divide sensor count {n}")]
    Indivisible { n: usize, k: usize },
    #[error("window stride s = n/k must be at least 2 (got s={s})")]
    WindowTooSmall { s: usize },
    #[error("relay index {j} out of range 0..{k}")]
    RelayOutOfRange { j: usize, k: usize },
    #[error("interleaving requires k >= 2 and r >= 2 (got k={k}, r={r})")]
    InterleavingShape { k: usize, r: usize },
    #[error("loop target {loops} outside 1..={n}")]
    LoopCountRange { loops: usize, n: usize },
    #[error("scheme failed validation: {}", summarize(.0))]
    Invalid(Vec<Violation>),
    #[error("expected {expected} payloads, got {got}")]
    PayloadCount { expected: usize, got: usize },
    #[error("payloads must share one length")]
    PayloadLengths,
    #[error("scheme file: {0}")]
    Format(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("received values have mixed lengths ({a} and {b} bytes)")]
    MixedLengths { a: usize, b: usize },
    #[error("received value for unknown slot (relay {relay}, slot {index})")]
    UnknownSlot { relay: usize, index: usize },
    #[error("conflicting derivations for packet {packet}")]
    Integrity { packet: usize },
    #[error("undecodable: components without a plain packet: {components:?}")]
    Undecodable { components: Vec<Vec<usize>> },
}

/// Position of one relay output: relay `relay`, slot `index` (both 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub relay: usize,
    pub index: usize,
}

/// Payload of one relay output slot. `Pair` is unordered.
#[derive(Debug, Clone, Copy, Eq)]
pub enum Encoding {
    Single(usize),
    Pair(usize, usize),
}

impl PartialEq for Encoding {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Encoding::Single(a), Encoding::Single(b)) => a == b,
            (Encoding::Pair(a, b), Encoding::Pair(c, d)) => {
                (a.min(b), a.max(b)) == (c.min(d), c.max(d))
            }
            _ => false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Violation {
    #[error("relay {relay} has {got} slots, expected {expected}")]
    RelaySlotCount {
        relay: usize,
        got: usize,
        expected: usize,
    },
    #[error("slot (relay {}, slot {}) references packet {packet} outside 1..=n", slot.relay, slot.index)]
    PacketOutOfRange { slot: Slot, packet: usize },
    #[error("slot (relay {}, slot {}) references packet {packet} outside the relay window", slot.relay, slot.index)]
    OutsideWindow { slot: Slot, packet: usize },
    #[error("slot (relay {}, slot {}) pairs packet {packet} with itself", slot.relay, slot.index)]
    DegeneratePair { slot: Slot, packet: usize },
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Shape of a scheme: `n` sensors, `k` relays, redundancy `r`, window stride
/// `s = n/k`, slots per relay `t = s*r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WbanParams {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub s: usize,
    pub t: usize,
}

/// 1-based wraparound of packet indices.
fn wrap(n: usize, x: usize) -> usize {
    (x - 1) % n + 1
}

impl WbanParams {
    pub fn derive(n: usize, k: usize, r: usize) -> Result<Self, SchemeError> {
        if n == 0 || k == 0 || r == 0 {
            return Err(SchemeError::NonPositive { n, k, r });
        }
        if n % k != 0 {
            return Err(SchemeError::Indivisible { n, k });
        }
        let s = n / k;
        if s < 2 {
            return Err(SchemeError::WindowTooSmall { s });
        }
        Ok(Self {
            n,
            k,
            r,
            s,
            t: s * r,
        })
    }

    /// The `t` packet ids relay `j` hears, in window order.
    pub fn relay_window(&self, j: usize) -> Result<Vec<usize>, SchemeError> {
        if j >= self.k {
            return Err(SchemeError::RelayOutOfRange { j, k: self.k });
        }
        Ok((1..=self.t).map(|b| wrap(self.n, j * self.s + b)).collect())
    }
}

#[derive(Serialize, Deserialize)]
struct SchemeFile {
    n: usize,
    k: usize,
    r: usize,
    relays: Vec<RelayFile>,
}

#[derive(Serialize, Deserialize)]
struct RelayFile {
    j: usize,
    slots: Vec<Vec<usize>>,
}

/// A full scheme: one encoding per relay output slot (`r*n` in total).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingScheme {
    params: WbanParams,
    relays: Vec<Vec<Encoding>>,
}

impl CodingScheme {
    /// Plain scheme: every window packet forwarded in the clear.
    pub fn plain(params: WbanParams) -> Self {
        let relays = (0..params.k)
            .map(|j| {
                params
                    .relay_window(j)
                    .expect("relay index in range")
                    .into_iter()
                    .map(Encoding::Single)
                    .collect()
            })
            .collect();
        Self { params, relays }
    }

    /// Interleaved scheme with exactly `loops` plain slots.
    ///
    /// Relay `j` starts from a ring pattern over its window (1-based slot
    /// position `b`): cross pairs `(j*s+b, (j+1)*s+b)` for `b < s`,
    /// consecutive pairs `(j*s+b, j*s+b+1)` for `s <= b < t`, and the
    /// closing pair `(j*s+t, j*s+1)` at `b = t`. With `y = loops / k` and
    /// `z = loops % k`, slots `1..=y` of every relay are then replaced by
    /// plain packets `j*s+1 ..= j*s+y`, and relays `j < z` additionally
    /// replace slot `y+1` with plain packet `j*s+y+1`. Each replacement is
    /// applied once, so the graph gets exactly `loops` loops, all at
    /// distinct vertices.
    pub fn interleaved(params: WbanParams, loops: usize) -> Result<Self, SchemeError> {
        if params.k < 2 || params.r < 2 {
            return Err(SchemeError::InterleavingShape {
                k: params.k,
                r: params.r,
            });
        }
        if loops == 0 || loops > params.n {
            return Err(SchemeError::LoopCountRange {
                loops,
                n: params.n,
            });
        }
        let (n, s, t) = (params.n, params.s, params.t);
        let y = loops / params.k;
        let z = loops % params.k;
        let mut relays = Vec::with_capacity(params.k);
        for j in 0..params.k {
            let base = j * s;
            let mut slots: Vec<Encoding> = (1..=t)
                .map(|b| {
                    if b <= s - 1 {
                        Encoding::Pair(wrap(n, base + b), wrap(n, base + s + b))
                    } else if b < t {
                        Encoding::Pair(wrap(n, base + b), wrap(n, base + b + 1))
                    } else {
                        Encoding::Pair(wrap(n, base + t), wrap(n, base + 1))
                    }
                })
                .collect();
            for b in 1..=y {
                slots[b - 1] = Encoding::Single(wrap(n, base + b));
            }
            if j < z {
                slots[y] = Encoding::Single(wrap(n, base + y + 1));
            }
            relays.push(slots);
        }
        Ok(Self { params, relays })
    }

    pub fn params(&self) -> &WbanParams {
        &self.params
    }

    pub fn relays(&self) -> &[Vec<Encoding>] {
        &self.relays
    }

    pub fn encoding(&self, slot: Slot) -> Option<Encoding> {
        self.relays.get(slot.relay)?.get(slot.index).copied()
    }

    /// All slots in edge-id order: relay 0's slots, then relay 1's, ...
    pub fn slots(&self) -> impl Iterator<Item = (Slot, Encoding)> + '_ {
        self.relays.iter().enumerate().flat_map(|(relay, slots)| {
            slots
                .iter()
                .enumerate()
                .map(move |(index, enc)| (Slot { relay, index }, *enc))
        })
    }

    /// Collects every contract violation; an empty list means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (j, slots) in self.relays.iter().enumerate() {
            if slots.len() != self.params.t {
                out.push(Violation::RelaySlotCount {
                    relay: j,
                    got: slots.len(),
                    expected: self.params.t,
                });
            }
            let window: BTreeSet<usize> = self
                .params
                .relay_window(j)
                .expect("relay index in range")
                .into_iter()
                .collect();
            for (index, enc) in slots.iter().enumerate() {
                let slot = Slot { relay: j, index };
                let check = |packet: usize, out: &mut Vec<Violation>| {
                    if packet < 1 || packet > self.params.n {
                        out.push(Violation::PacketOutOfRange { slot, packet });
                    } else if !window.contains(&packet) {
                        out.push(Violation::OutsideWindow { slot, packet });
                    }
                };
                match *enc {
                    Encoding::Single(i) => check(i, &mut out),
                    Encoding::Pair(i, i2) => {
                        check(i, &mut out);
                        check(i2, &mut out);
                        if i == i2 {
                            out.push(Violation::DegeneratePair { slot, packet: i });
                        }
                    }
                }
            }
        }
        out
    }

    /// Graph view: one edge per slot in slot order (edge id = j*t + b),
    /// pairs as edges, singles as loops, provenance = the slot.
    pub fn to_graph(&self) -> Result<MultiGraph, SchemeError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(SchemeError::Invalid(violations));
        }
        let edges = self
            .slots()
            .map(|(slot, enc)| match enc {
                Encoding::Single(i) => Edge::with_provenance(i, i, slot),
                Encoding::Pair(i, i2) => Edge::with_provenance(i, i2, slot),
            })
            .collect();
        Ok(MultiGraph::from_edges(self.params.n, edges).expect("validated packet ids"))
    }

    /// GF(2) rank test: the received slots determine all `n` packets exactly
    /// when their XOR equations have full rank. Slots outside the grid are
    /// ignored.
    pub fn rank_decodable(&self, received: impl IntoIterator<Item = Slot>) -> bool {
        let n = self.params.n;
        if n == 0 {
            return true;
        }
        let words = (n + 63) / 64;
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for slot in received {
            let Some(enc) = self.encoding(slot) else {
                continue;
            };
            let mut row = vec![0u64; words];
            let mut set = |i: usize| row[(i - 1) / 64] ^= 1u64 << ((i - 1) % 64);
            match enc {
                Encoding::Single(i) => set(i),
                Encoding::Pair(i, i2) => {
                    set(i);
                    set(i2);
                }
            }
            rows.push(row);
        }
        let mut rank = 0;
        for col in 0..n {
            let (w, b) = (col / 64, col % 64);
            let Some(pivot) = (rank..rows.len()).find(|&i| rows[i][w] >> b & 1 == 1) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && row[w] >> b & 1 == 1 {
                    for (a, p) in row.iter_mut().zip(&pivot_row) {
                        *a ^= *p;
                    }
                }
            }
            rank += 1;
            if rank == n {
                return true;
            }
        }
        rank == n
    }

    /// Relay outputs for one round of equal-length payloads.
    pub fn encode(&self, payloads: &[Vec<u8>]) -> Result<Vec<(Slot, Vec<u8>)>, SchemeError> {
        if payloads.len() != self.params.n {
            return Err(SchemeError::PayloadCount {
                expected: self.params.n,
                got: payloads.len(),
            });
        }
        if payloads.windows(2).any(|w| w[0].len() != w[1].len()) {
            return Err(SchemeError::PayloadLengths);
        }
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(SchemeError::Invalid(violations));
        }
        Ok(self
            .slots()
            .map(|(slot, enc)| {
                let value = match enc {
                    Encoding::Single(i) => payloads[i - 1].clone(),
                    Encoding::Pair(i, i2) => xor_bytes(&payloads[i - 1], &payloads[i2 - 1]),
                };
                (slot, value)
            })
            .collect())
    }

    /// Recovers all `n` payloads from the received slot values.
    ///
    /// Plain slots seed packets; XOR slots propagate them through their
    /// component. Redundant derivations (extra loops, cycle-closing edges)
    /// are verified, not overwritten. When a component has no plain packet
    /// the failure lists those components.
    pub fn decode(&self, received: &BTreeMap<Slot, Vec<u8>>) -> Result<Vec<Vec<u8>>, DecodeError> {
        let n = self.params.n;
        let mut len: Option<usize> = None;
        for value in received.values() {
            match len {
                None => len = Some(value.len()),
                Some(l) if l != value.len() => {
                    return Err(DecodeError::MixedLengths {
                        a: l,
                        b: value.len(),
                    })
                }
                _ => {}
            }
        }

        let mut singles: Vec<(usize, &Vec<u8>)> = Vec::new();
        let mut pairs: Vec<(usize, usize, &Vec<u8>)> = Vec::new();
        for (slot, value) in received {
            match self.encoding(*slot) {
                Some(Encoding::Single(i)) => singles.push((i, value)),
                Some(Encoding::Pair(i, i2)) => pairs.push((i, i2, value)),
                None => {
                    return Err(DecodeError::UnknownSlot {
                        relay: slot.relay,
                        index: slot.index,
                    })
                }
            }
        }

        let mut known: Vec<Option<Vec<u8>>> = vec![None; n + 1];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &(i, value) in &singles {
            match &known[i] {
                Some(existing) if existing != value => {
                    return Err(DecodeError::Integrity { packet: i })
                }
                Some(_) => {}
                None => {
                    known[i] = Some(value.clone());
                    queue.push_back(i);
                }
            }
        }

        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for (ei, &(i, i2, _)) in pairs.iter().enumerate() {
            adjacency[i].push(ei);
            adjacency[i2].push(ei);
        }
        let mut edge_done = vec![false; pairs.len()];
        while let Some(v) = queue.pop_front() {
            for idx in 0..adjacency[v].len() {
                let ei = adjacency[v][idx];
                if edge_done[ei] {
                    continue;
                }
                let (a, b, value) = pairs[ei];
                let w = if a == v { b } else { a };
                let derived = xor_bytes(known[v].as_ref().expect("queued packets are known"), value);
                match &known[w] {
                    Some(existing) => {
                        if *existing != derived {
                            return Err(DecodeError::Integrity { packet: w });
                        }
                    }
                    None => {
                        known[w] = Some(derived);
                        queue.push_back(w);
                    }
                }
                edge_done[ei] = true;
            }
        }

        if known[1..].iter().all(Option::is_some) {
            return Ok(known.into_iter().skip(1).map(Option::unwrap).collect());
        }

        // Loopless components of the received subgraph stay unknown.
        let received_graph = MultiGraph::new(
            n,
            singles
                .iter()
                .map(|&(i, _)| (i, i))
                .chain(pairs.iter().map(|&(i, i2, _)| (i, i2))),
        )
        .expect("received packet ids were resolved against the scheme");
        let components = received_graph
            .components()
            .into_iter()
            .filter(|comp| comp.iter().all(|&v| known[v].is_none()))
            .collect();
        Err(DecodeError::Undecodable { components })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.file_repr()).expect("scheme serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.file_repr()).expect("scheme serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, SchemeError> {
        let file: SchemeFile =
            serde_json::from_str(text).map_err(|e| SchemeError::Format(e.to_string()))?;
        let params = WbanParams::derive(file.n, file.k, file.r)?;
        let mut relays: Vec<Option<Vec<Encoding>>> = vec![None; params.k];
        for relay in &file.relays {
            if relay.j >= params.k {
                return Err(SchemeError::Format(format!(
                    "relay index {} out of range 0..{}",
                    relay.j, params.k
                )));
            }
            if relays[relay.j].is_some() {
                return Err(SchemeError::Format(format!("duplicate relay {}", relay.j)));
            }
            let slots = relay
                .slots
                .iter()
                .map(|raw| match raw.as_slice() {
                    [i] => Ok(Encoding::Single(*i)),
                    [i, i2] => Ok(Encoding::Pair(*i, *i2)),
                    _ => Err(SchemeError::Format(
                        "slots must hold one or two packet ids".into(),
                    )),
                })
                .collect::<Result<Vec<_>, _>>()?;
            relays[relay.j] = Some(slots);
        }
        let relays = relays
            .into_iter()
            .enumerate()
            .map(|(j, slots)| slots.ok_or(SchemeError::Format(format!("missing relay {j}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { params, relays })
    }

    fn file_repr(&self) -> SchemeFile {
        SchemeFile {
            n: self.params.n,
            k: self.params.k,
            r: self.params.r,
            relays: self
                .relays
                .iter()
                .enumerate()
                .map(|(j, slots)| RelayFile {
                    j,
                    slots: slots
                        .iter()
                        .map(|enc| match *enc {
                            Encoding::Single(i) => vec![i],
                            Encoding::Pair(i, i2) => vec![i, i2],
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

fn xor_bytes(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}
