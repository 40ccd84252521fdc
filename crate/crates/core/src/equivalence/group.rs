//! Finitely presented groups: free reduction, a union-find pass for short
//! relators, abelianization by Smith normal form and bounded Tietze moves.

use serde::Serialize;

/// A word in the generators. Letter `g + 1` stands for generator `g` and
/// `-(g + 1)` for its inverse.
pub type Word = Vec<i32>;

fn letter_gen(l: i32) -> usize {
    l.unsigned_abs() as usize - 1
}

fn letter(g: usize, sign: i32) -> i32 {
    (g as i32 + 1) * sign
}

/// Cancels adjacent inverse pairs.
pub fn free_reduce(w: &mut Word) {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w.iter() {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    *w = out;
}

/// Free reduction followed by cancelling inverse letters at the two ends,
/// which replaces a relator by a conjugate.
pub fn cyclic_reduce(w: &mut Word) {
    free_reduce(w);
    let (mut i, mut j) = (0, w.len());
    while j - i >= 2 && w[i] == -w[j - 1] {
        i += 1;
        j -= 1;
    }
    if i > 0 {
        *w = w[i..j].to_vec();
    }
}

pub fn invert(w: &[i32]) -> Word {
    w.iter().rev().map(|&l| -l).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupPresentation {
    generators: usize,
    relators: Vec<Word>,
}

impl GroupPresentation {
    /// Cyclically reduces the relators and drops empty or repeated ones.
    ///
    /// # Panics
    /// If a relator uses a letter outside `±1..=±generators`.
    pub fn new(generators: usize, relators: Vec<Word>) -> Self {
        let mut rels = Vec::with_capacity(relators.len());
        for mut w in relators {
            assert!(
                w.iter().all(|&l| l != 0 && letter_gen(l) < generators),
                "relator references a missing generator"
            );
            cyclic_reduce(&mut w);
            if !w.is_empty() {
                rels.push(w);
            }
        }
        rels.sort();
        rels.dedup();
        Self { generators, relators: rels }
    }

    pub fn free(generators: usize) -> Self {
        Self { generators, relators: Vec::new() }
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Triviality {
    Trivial,
    Nontrivial,
    Unknown,
}

/// Streams relators through a signed union-find. Relators that become a
/// single letter kill it, two-letter relators in distinct generators identify
/// them, and the rest are kept for later passes.
pub(crate) struct CheapReducer {
    parent: Vec<usize>,
    /// `g = parent^sign`
    sign: Vec<i32>,
    killed: Vec<bool>,
    pending: Vec<Word>,
    changed: bool,
    path: Vec<usize>,
}

impl CheapReducer {
    pub fn new(generators: usize) -> Self {
        Self {
            parent: (0..generators).collect(),
            sign: vec![1; generators],
            killed: vec![false; generators],
            pending: Vec::new(),
            changed: false,
            path: Vec::new(),
        }
    }

    /// Root of `g` and the sign with `g = root^sign`, `None` once killed.
    fn find(&mut self, g: usize) -> Option<(usize, i32)> {
        let mut x = g;
        self.path.clear();
        while self.parent[x] != x {
            self.path.push(x);
            x = self.parent[x];
        }
        let root = x;
        for idx in (0..self.path.len()).rev() {
            let c = self.path[idx];
            let p = self.parent[c];
            if p != root {
                self.sign[c] *= self.sign[p];
                self.parent[c] = root;
            }
        }
        if self.killed[root] {
            return None;
        }
        Some((root, if g == root { 1 } else { self.sign[g] }))
    }

    fn substitute(&mut self, word: &[i32]) -> Word {
        let mut w = Vec::with_capacity(word.len());
        for &l in word {
            if let Some((root, s)) = self.find(letter_gen(l)) {
                w.push(letter(root, s * l.signum()));
            }
        }
        cyclic_reduce(&mut w);
        w
    }

    pub fn push(&mut self, word: &[i32]) {
        let w = self.substitute(word);
        match w.len() {
            0 => {}
            1 => {
                self.killed[letter_gen(w[0])] = true;
                self.changed = true;
            }
            2 if letter_gen(w[0]) != letter_gen(w[1]) => {
                // x^a y^b = 1  ⇒  x = y^(-ab)
                let (x, a) = (letter_gen(w[0]), w[0].signum());
                let (y, b) = (letter_gen(w[1]), w[1].signum());
                self.parent[x] = y;
                self.sign[x] = -a * b;
                self.changed = true;
            }
            _ => self.pending.push(w),
        }
    }

    /// Re-feeds the kept relators until nothing changes.
    pub fn settle(&mut self) {
        loop {
            self.changed = false;
            let pending = std::mem::take(&mut self.pending);
            for w in &pending {
                self.push(w);
            }
            if !self.changed {
                break;
            }
        }
    }

    /// Presentation on the surviving roots, renumbered in increasing order,
    /// with the original index of each new generator.
    pub fn finish(mut self) -> (GroupPresentation, Vec<usize>) {
        self.settle();
        let n = self.parent.len();
        let mut new_index = vec![usize::MAX; n];
        let mut originals = Vec::new();
        for g in 0..n {
            if self.parent[g] == g && !self.killed[g] {
                new_index[g] = originals.len();
                originals.push(g);
            }
        }
        let pending = std::mem::take(&mut self.pending);
        let rels = pending
            .iter()
            .map(|w| {
                self.substitute(w)
                    .into_iter()
                    .map(|l| letter(new_index[letter_gen(l)], l.signum()))
                    .collect()
            })
            .collect();
        (GroupPresentation::new(originals.len(), rels), originals)
    }
}

/// Shortcut pass of [`CheapReducer`] on a whole presentation.
pub fn simplify_short_relators(g: &GroupPresentation) -> GroupPresentation {
    let mut r = CheapReducer::new(g.generators);
    for w in &g.relators {
        r.push(w);
    }
    r.finish().0
}

/// Abelianization as `Z^free_rank ⊕ ⊕ Z/tᵢ` with invariant factors `tᵢ > 1`
/// in divisibility order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Abelianization {
    pub free_rank: usize,
    pub torsion: Vec<u128>,
}

impl Abelianization {
    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

/// Smith normal form of the exponent-sum matrix. `None` if an intermediate
/// entry overflows `i128`.
pub fn abelianization(g: &GroupPresentation) -> Option<Abelianization> {
    let cols = g.generators;
    let mut a: Vec<Vec<i128>> = g
        .relators
        .iter()
        .map(|w| {
            let mut row = vec![0i128; cols];
            for &l in w {
                row[letter_gen(l)] += i128::from(l.signum());
            }
            row
        })
        .filter(|row| row.iter().any(|&v| v != 0))
        .collect();
    let rows = a.len();
    let mut diag: Vec<i128> = Vec::new();
    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = min_abs_entry(&a, t) else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = a[t][t];
            for i in t + 1..rows {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in t..cols {
                        let v = a[i][j].checked_sub(q.checked_mul(a[t][j])?)?;
                        a[i][j] = v;
                    }
                }
            }
            for j in t + 1..cols {
                let q = a[t][j] / p;
                if q != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] = row[j].checked_sub(q.checked_mul(row[t])?)?;
                    }
                }
            }
            // a remainder smaller than the pivot becomes the next pivot
            let col_rem = (t + 1..rows).find(|&i| a[i][t] != 0);
            let row_rem = (t + 1..cols).find(|&j| a[t][j] != 0);
            match (col_rem, row_rem) {
                (None, None) => break,
                (Some(i), _) => a.swap(t, i),
                (None, Some(j)) => {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                }
            }
        }
        diag.push(a[t][t].abs());
    }
    let free_rank = cols - diag.len();
    let mut d: Vec<u128> = diag.into_iter().map(|v| v as u128).collect();
    // diagonal entries → invariant factors
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = gcd(d[i], d[j]);
            let l = (d[i] / g).checked_mul(d[j])?;
            d[i] = g;
            d[j] = l;
        }
    }
    Some(Abelianization { free_rank, torsion: d.into_iter().filter(|&v| v != 1).collect() })
}

fn min_abs_entry(a: &[Vec<i128>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(i128, usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, &v) in row.iter().enumerate().skip(t) {
            if v != 0 && best.is_none_or(|(b, _, _)| v.abs() < b) {
                best = Some((v.abs(), i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Total relator length past which Tietze rewriting gives up.
const MAX_TOTAL_LENGTH: usize = 1 << 20;

/// Eliminates generators that occur exactly once in some relator, shortest
/// relator first, spending one step per relator rewritten. Returns the
/// number of generators left when no move applies or the budget runs out.
fn tietze(g: &GroupPresentation, budget: usize) -> usize {
    let mut gens = g.generators;
    let mut rels = g.relators.clone();
    let mut steps = 0usize;
    while gens > 0 {
        let mut choice: Option<(usize, usize, usize)> = None; // (len, relator, position)
        for (ri, w) in rels.iter().enumerate() {
            if choice.is_some_and(|(len, _, _)| len <= w.len()) {
                continue;
            }
            let mut counts = std::collections::HashMap::new();
            for &l in w {
                *counts.entry(letter_gen(l)).or_insert(0usize) += 1;
            }
            if let Some(pos) = w.iter().position(|&l| counts[&letter_gen(l)] == 1) {
                choice = Some((w.len(), ri, pos));
            }
        }
        let Some((_, ri, pos)) = choice else { return gens };
        let w = rels.swap_remove(ri);
        let eliminated = letter_gen(w[pos]);
        // w rotated to g^e·W, so g = W^(-e)
        let rest: Word = w[pos + 1..].iter().chain(&w[..pos]).copied().collect();
        let replacement = if w[pos] > 0 { invert(&rest) } else { rest };
        let inverse = invert(&replacement);
        let mut total = 0;
        for r in rels.iter_mut() {
            if !r.iter().any(|&l| letter_gen(l) == eliminated) {
                total += r.len();
                continue;
            }
            steps += 1;
            let mut out = Vec::with_capacity(r.len());
            for &l in r.iter() {
                if letter_gen(l) == eliminated {
                    out.extend_from_slice(if l > 0 { &replacement } else { &inverse });
                } else {
                    out.push(l);
                }
            }
            cyclic_reduce(&mut out);
            total += out.len();
            *r = out;
        }
        steps += 1;
        rels.retain(|r| !r.is_empty());
        for r in rels.iter_mut() {
            for l in r.iter_mut() {
                let g = letter_gen(*l);
                if g > eliminated {
                    *l = letter(g - 1, l.signum());
                }
            }
        }
        gens -= 1;
        if steps > budget || total > MAX_TOTAL_LENGTH {
            return gens;
        }
    }
    0
}

/// Decides triviality where it can: short relators are folded in first, a
/// nontrivial abelianization proves nontriviality, and Tietze elimination
/// down to no generators proves triviality. Anything else is `Unknown`.
pub fn is_trivial(g: &GroupPresentation, budget: usize) -> Triviality {
    if g.generators == 0 {
        return Triviality::Trivial;
    }
    let g = simplify_short_relators(g);
    if g.generators == 0 {
        return Triviality::Trivial;
    }
    if abelianization(&g).is_some_and(|ab| !ab.is_trivial()) {
        return Triviality::Nontrivial;
    }
    if tietze(&g, budget) == 0 {
        Triviality::Trivial
    } else {
        Triviality::Unknown
    }
}
