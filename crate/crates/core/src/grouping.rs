//! Partitioning Pauli terms into qubit-wise commuting measurement groups.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::encoding::{RegisterMap, Slot};
use crate::error::{domain, Error, Result};
use crate::model::CouplingGraph;
use crate::pauli::{Pauli, PauliString, PauliSum};

pub fn qubit_wise_commute(p: &PauliString, q: &PauliString) -> Result<bool> {
    p.qubit_wise_commutes(q)
}

/// Terms measured together in one basis. `members` index into the term
/// order of the [`PauliSum`] the group was built for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementGroup {
    pub basis: PauliString,
    pub members: Vec<usize>,
}

impl MeasurementGroup {
    /// True when `p` agrees with the basis on every non-identity letter.
    pub fn covers(&self, p: &PauliString) -> bool {
        let s = p.support();
        p.num_qubits() == self.basis.num_qubits()
            && (p.x_mask() ^ self.basis.x_mask()) & s == 0
            && (p.z_mask() ^ self.basis.z_mask()) & s == 0
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupRecord {
    basis: String,
    members: Vec<usize>,
}

impl Serialize for MeasurementGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupRecord { basis: self.basis.to_string(), members: self.members.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MeasurementGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = GroupRecord::deserialize(d)?;
        let basis: PauliString = r.basis.parse().map_err(D::Error::custom)?;
        if basis.letters().contains(&Pauli::I) {
            return Err(D::Error::custom("measurement basis must not contain I"));
        }
        let unique: BTreeSet<_> = r.members.iter().collect();
        if unique.len() != r.members.len() {
            return Err(D::Error::custom("duplicate group member"));
        }
        Ok(MeasurementGroup { basis, members: r.members })
    }
}

pub fn groups_to_json(groups: &[MeasurementGroup]) -> Result<String> {
    Ok(serde_json::to_string(groups)?)
}

pub fn groups_from_json(s: &str) -> Result<Vec<MeasurementGroup>> {
    let groups: Vec<MeasurementGroup> = serde_json::from_str(s)?;
    if let Some(first) = groups.first() {
        let n = first.basis.num_qubits();
        if groups.iter().any(|g| g.basis.num_qubits() != n) {
            return Err(Error::Parse("group bases have different widths".into()));
        }
    }
    Ok(groups)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupingMethod {
    Exact,
    /// The exact construction did not recognise the term structure.
    GreedyFallback,
    Greedy,
    Singleton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    pub groups: Vec<MeasurementGroup>,
    pub method: GroupingMethod,
}

impl Grouping {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Partition of the edges of the complete graph into perfect matchings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    n: usize,
    rounds: Vec<Vec<(usize, usize)>>,
}

impl Factorization {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rounds(&self) -> &[Vec<(usize, usize)>] {
        &self.rounds
    }

    /// Round containing edge `(i, j)`.
    pub fn round_of(&self, i: usize, j: usize) -> Option<usize> {
        let e = (i.min(j), i.max(j));
        self.rounds.iter().position(|r| r.contains(&e))
    }

    /// Every edge exactly once and no vertex twice in a round.
    pub fn is_valid(&self) -> bool {
        let mut seen = BTreeSet::new();
        for round in &self.rounds {
            let mut used = BTreeSet::new();
            for &(i, j) in round {
                if i >= j || j >= self.n || !used.insert(i) || !used.insert(j) || !seen.insert((i, j)) {
                    return false;
                }
            }
        }
        seen.len() == self.n * (self.n - 1) / 2
    }
}

/// Circle-method 1-factorisation of `K_n`; odd `n` uses a dummy vertex whose
/// edges are dropped.
pub fn round_robin_factorization(n: usize) -> Result<Factorization> {
    if n < 2 {
        return domain(format!("factorisation needs at least two vertices, got {n}"));
    }
    let nn = n + n % 2;
    let fixed = nn - 1;
    let rot = nn - 1;
    let mut rounds = Vec::with_capacity(rot);
    for r in 0..rot {
        let mut round = Vec::with_capacity(nn / 2);
        let mut push = |a: usize, b: usize| {
            if a < n && b < n {
                round.push((a.min(b), a.max(b)));
            }
        };
        push(fixed, r);
        for k in 1..nn / 2 {
            push((r + k) % rot, (r + rot - k) % rot);
        }
        round.sort_unstable();
        rounds.push(round);
    }
    Ok(Factorization { n, rounds })
}

/// X/Y pattern of one register: flips on bits `0..=k`, with `ymask` marking Y.
type Pattern = (u32, u64);

/// The register-level structure of a coupling term: the low-bit X/Y pattern
/// on each of two oscillators.
fn coupling_key(p: &PauliString, map: &RegisterMap) -> Option<(usize, usize, Pattern, Pattern)> {
    let mut per_osc: BTreeMap<usize, Pattern> = BTreeMap::new();
    for osc in 0..map.oscillators() {
        for axis in 0..map.axes() {
            let slot = Slot { oscillator: osc, axis };
            let off = map.offset(slot).ok()?;
            let reg = map.register_mask(slot).ok()?;
            let x = (p.x_mask() & reg) >> off;
            if x == 0 {
                continue;
            }
            if x & (x + 1) != 0 {
                // flips are not a contiguous run from bit 0
                return None;
            }
            let k = x.trailing_ones() - 1;
            let pat = (k, (p.z_mask() & reg) >> off & x);
            match per_osc.get(&osc) {
                Some(&prev) if prev != pat => return None,
                _ => {
                    per_osc.insert(osc, pat);
                }
            }
        }
    }
    if per_osc.len() != 2 {
        return None;
    }
    let mut it = per_osc.into_iter();
    let (i, pi) = it.next()?;
    let (j, pj) = it.next()?;
    Some((i, j, pi, pj))
}

fn write_pattern(basis: &mut PauliString, map: &RegisterMap, osc: usize, pat: Pattern) {
    let (k, ymask) = pat;
    for axis in 0..map.axes() {
        let off = map.offset(Slot { oscillator: osc, axis }).expect("oscillator in range");
        for b in 0..=k as usize {
            let letter = if (ymask >> b) & 1 == 1 { Pauli::Y } else { Pauli::X };
            basis.set(off + b, letter);
        }
    }
}

fn all_z(n: usize) -> Result<PauliString> {
    PauliString::from_masks(n, 0, mask(n))
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Cover construction: one all-Z group for diagonal terms, and per round of
/// the 1-factorisation one group per pair of low-bit X/Y patterns, shared by
/// every edge in the round. Unrecognised terms trigger the greedy fallback.
pub fn exact_grouping(h: &PauliSum, map: &RegisterMap, graph: &CouplingGraph) -> Result<Grouping> {
    if h.num_qubits() != map.num_qubits() {
        return Err(Error::DimensionMismatch { expected: map.num_qubits(), found: h.num_qubits() });
    }
    if graph.n() != map.oscillators() {
        return Err(Error::DimensionMismatch { expected: map.oscillators(), found: graph.n() });
    }
    let n_qubits = h.num_qubits();
    let mut diagonal = Vec::new();
    let mut keyed: BTreeMap<(usize, Pattern, Pattern), Vec<usize>> = BTreeMap::new();
    let factorization = if graph.n() >= 2 { Some(round_robin_factorization(graph.n())?) } else { None };
    let edges: BTreeSet<(usize, usize)> = graph.edges().iter().map(|e| (e.i, e.j)).collect();
    for (idx, (p, _)) in h.iter().enumerate() {
        if p.is_diagonal() {
            diagonal.push(idx);
            continue;
        }
        let fitted = coupling_key(p, map).filter(|(i, j, _, _)| edges.contains(&(*i, *j))).and_then(|(i, j, a, b)| {
            let round = factorization.as_ref()?.round_of(i, j)?;
            Some((round, a, b))
        });
        match fitted {
            Some(key) => keyed.entry(key).or_default().push(idx),
            None => {
                log::warn!("term {p} does not fit the coupling structure; using greedy grouping");
                let mut g = greedy_grouping(h)?;
                g.method = GroupingMethod::GreedyFallback;
                return Ok(g);
            }
        }
    }
    let mut groups = Vec::new();
    if !diagonal.is_empty() {
        groups.push(MeasurementGroup { basis: all_z(n_qubits)?, members: diagonal });
    }
    let rounds = factorization.as_ref().map(|f| f.rounds()).unwrap_or(&[]);
    for ((round, a, b), members) in keyed {
        let mut basis = all_z(n_qubits)?;
        for &(i, j) in &rounds[round] {
            if edges.contains(&(i, j)) {
                write_pattern(&mut basis, map, i, a);
                write_pattern(&mut basis, map, j, b);
            }
        }
        groups.push(MeasurementGroup { basis, members });
    }
    let groups = merge_identical_bases(groups);
    let grouping = Grouping { groups, method: GroupingMethod::Exact };
    validate_grouping(h, &grouping.groups)?;
    Ok(grouping)
}

fn merge_identical_bases(groups: Vec<MeasurementGroup>) -> Vec<MeasurementGroup> {
    let mut out: Vec<MeasurementGroup> = Vec::with_capacity(groups.len());
    for g in groups {
        match out.iter_mut().find(|o| o.basis == g.basis) {
            Some(o) => {
                o.members.extend(g.members);
                o.members.sort_unstable();
            }
            None => out.push(g),
        }
    }
    out
}

/// Largest-degree-first colouring of the graph whose edges join terms that
/// do not commute qubit-wise. Ties go to the lower term index.
pub fn greedy_grouping(h: &PauliSum) -> Result<Grouping> {
    let terms: Vec<PauliString> = h.iter().map(|(p, _)| *p).collect();
    let n = terms.len();
    let mut adj = vec![Vec::new(); n];
    for a in 0..n {
        for b in a + 1..n {
            if !terms[a].qubit_wise_commutes(&terms[b])? {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| adj[b].len().cmp(&adj[a].len()).then(a.cmp(&b)));
    let mut color = vec![usize::MAX; n];
    let mut ncolors = 0;
    for &v in &order {
        let used: BTreeSet<usize> = adj[v].iter().map(|&u| color[u]).filter(|&c| c != usize::MAX).collect();
        let c = (0..).find(|c| !used.contains(c)).expect("unbounded range");
        color[v] = c;
        ncolors = ncolors.max(c + 1);
    }
    let mut groups = vec![Vec::new(); ncolors];
    for (v, &c) in color.iter().enumerate() {
        groups[c].push(v);
    }
    let groups = groups
        .into_iter()
        .map(|members| cover_group(&terms, members, h.num_qubits()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Grouping { groups, method: GroupingMethod::Greedy })
}

/// One group per non-identity term; the identity rides along with the first.
pub fn singleton_grouping(h: &PauliSum) -> Result<Grouping> {
    let terms: Vec<PauliString> = h.iter().map(|(p, _)| *p).collect();
    let identity = terms.iter().position(|p| p.is_identity());
    let mut groups: Vec<Vec<usize>> =
        (0..terms.len()).filter(|&i| Some(i) != identity).map(|i| vec![i]).collect();
    if let Some(id) = identity {
        match groups.first_mut() {
            Some(g) => g.insert(0, id),
            None => groups.push(vec![id]),
        }
    }
    let groups = groups
        .into_iter()
        .map(|members| cover_group(&terms, members, h.num_qubits()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Grouping { groups, method: GroupingMethod::Singleton })
}

fn cover_group(terms: &[PauliString], members: Vec<usize>, n: usize) -> Result<MeasurementGroup> {
    let mut x = 0;
    let mut z = 0;
    let mut support = 0;
    for &m in &members {
        x |= terms[m].x_mask();
        z |= terms[m].z_mask();
        support |= terms[m].support();
    }
    // unused qubits are read in Z
    z |= mask(n) & !support;
    Ok(MeasurementGroup { basis: PauliString::from_masks(n, x, z)?, members })
}

/// Every term in exactly one group, and every member covered by its basis.
pub fn validate_grouping(h: &PauliSum, groups: &[MeasurementGroup]) -> Result<()> {
    let terms: Vec<PauliString> = h.iter().map(|(p, _)| *p).collect();
    let mut seen = vec![false; terms.len()];
    for (gi, g) in groups.iter().enumerate() {
        if g.basis.num_qubits() != h.num_qubits() {
            return Err(Error::DimensionMismatch { expected: h.num_qubits(), found: g.basis.num_qubits() });
        }
        if g.basis.weight() as usize != h.num_qubits() {
            return domain(format!("group {gi} basis contains identity letters"));
        }
        for &m in &g.members {
            let Some(p) = terms.get(m) else {
                return domain(format!("group {gi} references term {m} of {}", terms.len()));
            };
            if std::mem::replace(&mut seen[m], true) {
                return domain(format!("term {m} appears in more than one group"));
            }
            if !g.covers(p) {
                return domain(format!("group {gi} basis {} does not cover {p}", g.basis));
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return domain(format!("term {missing} is not in any group"));
    }
    Ok(())
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Circuit bound for order-`r` coupling: `(d-1)^2 (N-1) + 1` for even `N`
/// and `(d-1)^2 N + 1` for odd `N` when `r = 2`; the hypergraph formula
/// `(d-1)^r C(N-1, r-1) + 1` otherwise.
pub fn circuit_count_bound(n: usize, d: usize, r: usize) -> Result<u64> {
    crate::encoding::qubits_for_dim(d)?;
    if n < 2 || r < 2 || r > n {
        return domain(format!("need 2 <= r <= N, got N={n}, r={r}"));
    }
    let d1 = (d - 1) as u64;
    let n = n as u64;
    if r == 2 {
        let rounds = if n % 2 == 0 { n - 1 } else { n };
        return Ok(d1 * d1 * rounds + 1);
    }
    Ok(d1.pow(r as u32) * binomial(n - 1, r as u64 - 1) + 1)
}

/// Bound for three-dimensional oscillators: per round, one circuit per Pauli
/// term of a single `x (x) x` product.
pub fn circuit_count_bound_3d(n: usize, d: usize) -> Result<u64> {
    let m = crate::encoding::qubits_for_dim(d)? as u64;
    if n < 2 {
        return domain("need at least two oscillators");
    }
    let per = (d as u64 / 2 * m).pow(2);
    let n = n as u64;
    let rounds = if n % 2 == 0 { n - 1 } else { n };
    Ok(rounds * per + 1)
}
