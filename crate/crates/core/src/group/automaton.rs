use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use super::alphabet::{Alphabet, Letter};
use super::word::GroupElement;
use crate::error::{Error, Result};

/// Vertex index inside an [`AutomaticStructure`]. The initial vertex `*` is
/// always 0 and the augmentation vertex is always 1.
pub type VertexId = usize;

pub const INITIAL: VertexId = 0;
pub const AUGMENTATION: VertexId = 1;

/// An edge of the coding graph. `label == None` is the identity label carried
/// by the edges into the augmentation vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub label: Option<Letter>,
}

/// A strongly Markov (Cannon) coding: a finite labelled digraph whose paths
/// from `*` spell geodesic words, augmented by an absorbing vertex `0`.
///
/// The augmentation vertex receives an identity-labelled edge from every
/// vertex except `*` and has no outgoing edges; the shift's fixed point over
/// it is represented implicitly.
#[derive(Debug, Clone)]
pub struct AutomaticStructure {
    alphabet: Arc<Alphabet>,
    vertex_names: Vec<String>,
    edges: Vec<Edge>,
    /// Non-augmentation out-edges per vertex, sorted by (dst, label).
    out: Vec<Vec<(VertexId, Letter)>>,
    description: String,
}

impl AutomaticStructure {
    /// Builds a structure from parts, adding the augmentation edges if absent
    /// and checking reachability from `*`.
    pub fn new(
        alphabet: Arc<Alphabet>,
        vertex_names: Vec<String>,
        mut edges: Vec<Edge>,
        description: String,
    ) -> Result<Self> {
        let n = vertex_names.len();
        if n < 2 {
            return Err(Error::MissingInitial);
        }
        for e in &edges {
            if e.src >= n || e.dst >= n {
                return Err(Error::DanglingVertex(e.src.max(e.dst), 0));
            }
        }
        // Augmentation edges: identity label into vertex 1 from everything but `*`.
        let have: BTreeSet<VertexId> = edges
            .iter()
            .filter(|e| e.dst == AUGMENTATION && e.label.is_none())
            .map(|e| e.src)
            .collect();
        for v in 1..n {
            if !have.contains(&v) {
                edges.push(Edge { src: v, dst: AUGMENTATION, label: None });
            }
        }
        if edges.iter().any(|e| e.src == AUGMENTATION && e.dst != AUGMENTATION) {
            return Err(Error::Parse {
                line: 0,
                message: "augmentation vertex must not have outgoing edges".into(),
            });
        }
        edges.retain(|e| e.src != AUGMENTATION);
        edges.sort();
        edges.dedup();

        let mut out: Vec<Vec<(VertexId, Letter)>> = vec![Vec::new(); n];
        for e in &edges {
            if let Some(l) = e.label {
                out[e.src].push((e.dst, l));
            }
        }
        for o in &mut out {
            o.sort();
        }

        let s = AutomaticStructure { alphabet, vertex_names, edges, out, description };
        // Reachability over all edges (augmentation included).
        let mut seen = vec![false; n];
        seen[INITIAL] = true;
        let mut stack = vec![INITIAL];
        while let Some(v) = stack.pop() {
            for &(w, _) in &s.out[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
            if v != INITIAL && !seen[AUGMENTATION] {
                seen[AUGMENTATION] = true;
            }
        }
        if let Some(v) = (0..n).find(|&v| !seen[v]) {
            return Err(Error::UnreachableVertex(s.vertex_names[v].clone()));
        }
        Ok(s)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v]
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Labelled out-edges of `v`, excluding the augmentation edge.
    pub fn out_edges(&self, v: VertexId) -> &[(VertexId, Letter)] {
        &self.out[v]
    }

    /// The group element spelled by a vertex path (labels of consecutive edges
    /// multiplied left to right). Errors when a step is not an edge.
    pub fn evaluate_path(&self, path: &[VertexId]) -> Result<GroupElement> {
        let mut letters = Vec::with_capacity(path.len().saturating_sub(1));
        for w in path.windows(2) {
            let l = self.out[w[0]]
                .iter()
                .find(|&&(dst, _)| dst == w[1])
                .map(|&(_, l)| l)
                .ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("no edge {} -> {}", w[0], w[1]),
                })?;
            letters.push(l);
        }
        Ok(GroupElement::reduce(&self.alphabet, &letters))
    }

    /// The Cannon coding of the free group of rank `k` on the standard
    /// alphabet: `*` feeds every letter vertex, a letter vertex `x` feeds
    /// every `y` with `y ≠ x⁻¹`. Every path from `*` spells a geodesic and
    /// `ev` is a bijection onto the group.
    pub fn free_group(rank: usize) -> Result<Self> {
        let alphabet = Alphabet::free(rank)?;
        let mut names = vec!["*".to_string(), "0".to_string()];
        for x in alphabet.letters() {
            names.push(alphabet.name(x).to_string());
        }
        let mut edges = Vec::new();
        for x in alphabet.letters() {
            edges.push(Edge { src: INITIAL, dst: 2 + x as usize, label: Some(x) });
            for y in alphabet.letters() {
                if y != alphabet.inverse(x) {
                    edges.push(Edge { src: 2 + x as usize, dst: 2 + y as usize, label: Some(y) });
                }
            }
        }
        AutomaticStructure::new(alphabet, names, edges, format!("free group F{rank}"))
    }

    /// Vertex of the free coding that accepts reduced words ending in `x`.
    pub fn free_letter_vertex(x: Letter) -> VertexId {
        2 + x as usize
    }

    /// Writes the structure in the automaton text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# {}\n", self.description));
        s.push_str(&format!("vertices {}\n", self.vertex_count()));
        s.push_str(&format!("initial {INITIAL}\n"));
        for e in &self.edges {
            let label = match e.label {
                Some(l) => self.alphabet.name(l).to_string(),
                None => "e".to_string(),
            };
            s.push_str(&format!("edge {} {} {}\n", e.src, e.dst, label));
        }
        s
    }

    /// Parses the automaton text format:
    /// `vertices N`, `initial <id>`, then `edge <src> <dst> <label|e>` lines;
    /// `#` starts a comment. Vertices are renumbered so that the initial
    /// vertex is 0 and the augmentation vertex is 1, with the rest in file
    /// order. Letters are inferred from the labels with the case-pairing
    /// convention `a ↔ A`; an explicit `involution <x> <y>` line overrides it.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut n_decl: Option<usize> = None;
        let mut initial: Option<usize> = None;
        let mut raw_edges: Vec<(usize, usize, String, usize)> = Vec::new();
        let mut labels: BTreeSet<String> = BTreeSet::new();
        let mut pairs: Vec<(String, String)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let err = |message: &str| Error::Parse { line: lineno + 1, message: message.into() };
            match toks[0] {
                "vertices" if toks.len() == 2 => {
                    n_decl = Some(toks[1].parse().map_err(|_| err("bad vertex count"))?);
                }
                "initial" if toks.len() == 2 => {
                    initial = Some(toks[1].parse().map_err(|_| err("bad initial id"))?);
                }
                "involution" if toks.len() == 3 => {
                    pairs.push((toks[1].to_string(), toks[2].to_string()));
                }
                "edge" if toks.len() == 4 => {
                    let src: usize = toks[1].parse().map_err(|_| err("bad source id"))?;
                    let dst: usize = toks[2].parse().map_err(|_| err("bad target id"))?;
                    if toks[3] != "e" {
                        labels.insert(toks[3].to_string());
                    }
                    raw_edges.push((src, dst, toks[3].to_string(), lineno + 1));
                }
                _ => return Err(err("unrecognized directive")),
            }
        }

        let n = n_decl.ok_or(Error::Parse { line: 0, message: "missing `vertices`".into() })?;
        let init = initial.ok_or(Error::MissingInitial)?;
        if init >= n {
            return Err(Error::MissingInitial);
        }
        for &(src, dst, _, line) in &raw_edges {
            if src >= n {
                return Err(Error::DanglingVertex(src, line));
            }
            if dst >= n {
                return Err(Error::DanglingVertex(dst, line));
            }
        }

        let names: Vec<String> = labels.into_iter().collect();
        let mut inverse: Vec<Letter> = (0..names.len() as u8).collect();
        let find = |name: &str| names.iter().position(|n| n == name);
        if pairs.is_empty() {
            // Case-pairing convention for single-character labels.
            for (i, name) in names.iter().enumerate() {
                let mut chars = name.chars();
                if let (Some(c), None) = (chars.next(), chars.next()) {
                    let flipped: String = if c.is_lowercase() {
                        c.to_ascii_uppercase().to_string()
                    } else {
                        c.to_ascii_lowercase().to_string()
                    };
                    if let Some(j) = find(&flipped) {
                        inverse[i] = j as Letter;
                    }
                }
            }
        } else {
            for (x, y) in &pairs {
                let (i, j) = match (find(x), find(y)) {
                    (Some(i), Some(j)) => (i, j),
                    _ => {
                        return Err(Error::Parse {
                            line: 0,
                            message: format!("involution names unknown: {x} {y}"),
                        })
                    }
                };
                inverse[i] = j as Letter;
                inverse[j] = i as Letter;
            }
        }
        let alphabet = Alphabet::new(names, inverse)?;

        // Detect the augmentation vertex: common target of identity edges.
        let aug_targets: BTreeSet<usize> =
            raw_edges.iter().filter(|(_, _, l, _)| l == "e").map(|&(_, d, _, _)| d).collect();
        if aug_targets.len() > 1 {
            return Err(Error::Parse {
                line: 0,
                message: "identity-labelled edges target more than one vertex".into(),
            });
        }
        let aug = aug_targets.into_iter().next();

        // Renumber: initial -> 0, augmentation -> 1 (inserted if absent),
        // remaining vertices in file order.
        let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
        remap.insert(init, INITIAL);
        let mut names_out = vec!["*".to_string(), "0".to_string()];
        if let Some(a) = aug {
            remap.insert(a, AUGMENTATION);
        }
        let mut next = 2;
        for v in 0..n {
            if !remap.contains_key(&v) {
                remap.insert(v, next);
                names_out.push(format!("v{v}"));
                next += 1;
            }
        }

        let mut edges = Vec::new();
        for (src, dst, label, _) in raw_edges {
            let label = if label == "e" { None } else { Some(alphabet.letter(&label)?) };
            edges.push(Edge { src: remap[&src], dst: remap[&dst], label });
        }
        AutomaticStructure::new(alphabet, names_out, edges, "parsed automaton".into())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_text(&text)
    }

    /// Iterates over all paths from `*` of length exactly `n` (avoiding the
    /// augmentation vertex), calling `f` with the vertex path.
    pub fn for_each_initial_path(&self, n: usize, mut f: impl FnMut(&[VertexId])) {
        let mut path = vec![INITIAL];
        self.walk(n, &mut path, &mut f);
    }

    fn walk(&self, n: usize, path: &mut Vec<VertexId>, f: &mut impl FnMut(&[VertexId])) {
        if path.len() == n + 1 {
            f(path);
            return;
        }
        let v = *path.last().unwrap();
        for &(w, _) in &self.out[v] {
            path.push(w);
            self.walk(n, path, f);
            path.pop();
        }
    }
}

/// Outcome of [`validate_strongly_markov`]: violation lists are capped at 32
/// entries each; counts are exact.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub depth: usize,
    /// Paths from `*` counted per length 1..=depth.
    pub path_counts: Vec<u64>,
    pub injectivity_violations: Vec<String>,
    pub geodesy_violations: Vec<String>,
    pub surjectivity_missing: Vec<String>,
    /// True when surjectivity could be checked (free groups only).
    pub surjectivity_checked: bool,
    pub passed: bool,
}

/// Checks conditions of the strongly Markov definition to path depth `n`:
/// `ev` injective on `*`-paths, each label word geodesic (length equals path
/// length after free reduction), and — for free groups — image equal to the
/// word ball of radius `n`.
pub fn validate_strongly_markov(a: &AutomaticStructure, n: usize) -> ValidationReport {
    let alphabet = a.alphabet().clone();
    let is_free = alphabet.free_rank().is_some();
    let mut seen: BTreeMap<GroupElement, Vec<VertexId>> = BTreeMap::new();
    seen.insert(GroupElement::identity(), vec![INITIAL]);
    let mut injectivity = Vec::new();
    let mut geodesy = Vec::new();
    let mut counts = vec![0u64; n];

    for len in 1..=n {
        a.for_each_initial_path(len, |path| {
            counts[len - 1] += 1;
            let g = a.evaluate_path(path).expect("walk produces edge paths");
            if g.len() != len && geodesy.len() < 32 {
                geodesy.push(format!(
                    "path {:?} spells `{}` of length {} ≠ {}",
                    path,
                    g.display(&alphabet),
                    g.len(),
                    len
                ));
            }
            if let Some(prev) = seen.get(&g) {
                if prev != path && injectivity.len() < 32 {
                    injectivity.push(format!(
                        "element `{}` reached by {:?} and {:?}",
                        g.display(&alphabet),
                        prev,
                        path
                    ));
                }
            } else {
                seen.insert(g, path.to_vec());
            }
        });
    }

    let mut missing = Vec::new();
    let surjectivity_checked = is_free;
    if is_free {
        // Independent ball generator: all reduced words of length <= n.
        let mut stack: Vec<GroupElement> = vec![GroupElement::identity()];
        while let Some(w) = stack.pop() {
            if !seen.contains_key(&w) && missing.len() < 32 {
                missing.push(a.alphabet().format_word(w.letters()));
            }
            if w.len() < n {
                for x in alphabet.letters() {
                    if w.letters().last().is_some_and(|&y| alphabet.inverse(y) == x) {
                        continue;
                    }
                    let mut l = w.letters().to_vec();
                    l.push(x);
                    stack.push(GroupElement::from_reduced(l));
                }
            }
        }
    }

    let passed = injectivity.is_empty() && geodesy.is_empty() && missing.is_empty();
    ValidationReport {
        depth: n,
        path_counts: counts,
        injectivity_violations: injectivity,
        geodesy_violations: geodesy,
        surjectivity_missing: missing,
        surjectivity_checked,
        passed,
    }
}
