//! Three-strand positive braid monoid: Artin classes, parabolic reduction with
//! certificates, the monoid identities and non-reduction lemmas, and encoding
//! of three sampled curves as a positive word.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::GridFunction;

pub const DEFAULT_BOUND: usize = 18;
const HARD_BOUND: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Letter {
    X,
    Y,
}

/// Positive word over {X, Y}; the empty word is the trivial braid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BraidWord {
    pub letters: Vec<Letter>,
}

impl BraidWord {
    pub fn identity() -> Self {
        Self { letters: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &BraidWord) -> BraidWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        BraidWord { letters }
    }

    pub fn pow(&self, k: usize) -> BraidWord {
        BraidWord {
            letters: self.letters.repeat(k),
        }
    }

    fn key(&self) -> Key {
        let mut bits = 0u64;
        for l in &self.letters {
            bits = (bits << 1) | (*l == Letter::Y) as u64;
        }
        Key {
            len: self.letters.len() as u8,
            bits,
        }
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "I");
        }
        for l in &self.letters {
            write!(f, "{}", if *l == Letter::X { 'X' } else { 'Y' })?;
        }
        Ok(())
    }
}

impl FromStr for BraidWord {
    type Err = Error;

    /// Accepts letters X/Y (case-insensitive), optional exponents ("X2Y3"), and "I" or "" for the identity.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "I" || s == "1" {
            return Ok(Self::identity());
        }
        let mut letters = Vec::new();
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace() && *c != '^').collect();
        let mut i = 0;
        while i < chars.len() {
            let l = match chars[i] {
                'X' | 'x' => Letter::X,
                'Y' | 'y' => Letter::Y,
                c => return invalid(format!("unexpected character {c:?} in braid word")),
            };
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let reps = if start == i {
                1
            } else {
                chars[start..i].iter().collect::<String>().parse::<usize>().unwrap()
            };
            letters.extend(std::iter::repeat(l).take(reps));
        }
        Ok(Self { letters })
    }
}

impl Serialize for BraidWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Shorthand parser for literals known to be valid.
pub fn word(s: &str) -> BraidWord {
    s.parse().expect("valid braid literal")
}

/// Words packed as bits, first letter most significant, X = 0, Y = 1, so
/// numeric order within a length is lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Key {
    len: u8,
    bits: u64,
}

impl Key {
    fn to_word(self) -> BraidWord {
        let n = self.len as usize;
        let letters = (0..n)
            .map(|i| {
                if (self.bits >> (n - 1 - i)) & 1 == 1 {
                    Letter::Y
                } else {
                    Letter::X
                }
            })
            .collect();
        BraidWord { letters }
    }

    fn letter(self, i: usize) -> u64 {
        (self.bits >> (self.len as usize - 1 - i)) & 1
    }

    /// Apply XYX <-> YXY at every admissible position.
    fn artin_neighbours(self, out: &mut Vec<Key>) {
        let n = self.len as usize;
        for i in 0..n.saturating_sub(2) {
            let shift = n - 3 - i;
            let tri = (self.bits >> shift) & 0b111;
            if tri == 0b010 || tri == 0b101 {
                out.push(Key {
                    len: self.len,
                    bits: self.bits ^ (0b111 << shift),
                });
            }
        }
    }

    /// Remove the letters at positions i, i+1.
    fn delete_pair(self, i: usize) -> Key {
        let n = self.len as usize;
        let right_len = n - i - 2;
        let left = self.bits >> (n - i);
        let right = self.bits & ((1u64 << right_len) - 1);
        Key {
            len: self.len - 2,
            bits: (left << right_len) | right,
        }
    }
}

/// Artin-equivalence class under XYX = YXY.
#[derive(Debug, Clone, Serialize)]
pub struct EquivClass {
    /// Lexicographically least member.
    pub canonical: BraidWord,
    pub size: usize,
    pub length: usize,
    #[serde(skip)]
    members: Vec<Key>,
}

impl EquivClass {
    pub fn members(&self) -> Vec<BraidWord> {
        self.members.iter().map(|k| k.to_word()).collect()
    }

    pub fn contains(&self, w: &BraidWord) -> bool {
        let k = w.key();
        self.members.binary_search(&k).is_ok()
    }
}

/// How a verdict was reached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Mechanism {
    /// Target already in the start class (no deletion needed).
    Equivalent,
    /// Found by breadth-first search.
    Search,
    /// Target longer than the start, or of different parity.
    LengthObstruction,
    /// Every class reachable at the target length was enumerated without meeting the target.
    ExhaustedSearch,
}

/// One reduction step: rewrite `from` within its class to `rewritten`, then delete
/// the pair at `position` to obtain `result`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionStep {
    pub from: BraidWord,
    pub rewritten: BraidWord,
    pub position: usize,
    pub result: BraidWord,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionCertificate {
    pub source: BraidWord,
    pub target: BraidWord,
    pub reachable: bool,
    pub mechanism: Mechanism,
    /// Deletions along any reduction path: (len A - len B)/2.
    pub deletions: usize,
    /// Verdict when an empty sequence of reductions counts (reflexive closure).
    pub reachable_allowing_zero_steps: bool,
    /// Verdict when at least one simple reduction is required.
    pub reachable_requiring_a_step: bool,
    pub trace: Vec<ReductionStep>,
    /// Classes enumerated per word length, longest first.
    pub classes_per_length: Vec<(usize, usize)>,
}

/// Class enumeration and reachability with memoization.
pub struct BraidEngine {
    bound: usize,
    classes: HashMap<Key, Arc<EquivClass>>,
}

impl Default for BraidEngine {
    fn default() -> Self {
        Self::new(DEFAULT_BOUND).expect("default bound is valid")
    }
}

impl BraidEngine {
    pub fn new(bound: usize) -> Result<Self> {
        if bound > HARD_BOUND {
            return invalid(format!("length bound {bound} above the supported {HARD_BOUND}"));
        }
        Ok(Self {
            bound,
            classes: HashMap::new(),
        })
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    fn check(&self, w: &BraidWord) -> Result<()> {
        if w.len() > self.bound {
            return Err(Error::LengthBound {
                len: w.len(),
                bound: self.bound,
            });
        }
        Ok(())
    }

    fn class_of_key(&mut self, k: Key) -> Arc<EquivClass> {
        if let Some(c) = self.classes.get(&k) {
            return Arc::clone(c);
        }
        let mut seen: HashSet<Key> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(k);
        queue.push_back(k);
        let mut buf = Vec::new();
        while let Some(w) = queue.pop_front() {
            buf.clear();
            w.artin_neighbours(&mut buf);
            for &n in &buf {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        let mut members: Vec<Key> = seen.into_iter().collect();
        members.sort();
        let class = Arc::new(EquivClass {
            canonical: members[0].to_word(),
            size: members.len(),
            length: k.len as usize,
            members: members.clone(),
        });
        for m in members {
            self.classes.insert(m, Arc::clone(&class));
        }
        class
    }

    /// Closure of `w` under the Artin move applied to any substring.
    pub fn artin_class(&mut self, w: &BraidWord) -> Result<Arc<EquivClass>> {
        self.check(w)?;
        Ok(self.class_of_key(w.key()))
    }

    pub fn canonical(&mut self, w: &BraidWord) -> Result<BraidWord> {
        Ok(self.artin_class(w)?.canonical.clone())
    }

    pub fn equiv(&mut self, a: &BraidWord, b: &BraidWord) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        if a.len() != b.len() {
            return Ok(false);
        }
        let ca = self.class_of_key(a.key());
        Ok(ca.contains(b))
    }

    /// Decides whether `b` is reachable from `a` by Artin moves and deletions of X² or Y².
    pub fn reduce_reachable(&mut self, a: &BraidWord, b: &BraidWord) -> Result<ReductionCertificate> {
        self.check(a)?;
        self.check(b)?;
        let deletions = if a.len() >= b.len() { (a.len() - b.len()) / 2 } else { 0 };
        let mut cert = ReductionCertificate {
            source: a.clone(),
            target: b.clone(),
            reachable: false,
            mechanism: Mechanism::LengthObstruction,
            deletions,
            reachable_allowing_zero_steps: false,
            reachable_requiring_a_step: false,
            trace: Vec::new(),
            classes_per_length: Vec::new(),
        };
        if b.len() > a.len() || (a.len() - b.len()) % 2 == 1 {
            return Ok(cert);
        }
        let start = self.class_of_key(a.key());
        let target_class = self.class_of_key(b.key());
        let target_canon = target_class.members[0];
        if start.members[0] == target_canon {
            cert.reachable = true;
            cert.mechanism = Mechanism::Equivalent;
            cert.reachable_allowing_zero_steps = true;
            cert.reachable_requiring_a_step = false;
            cert.classes_per_length.push((a.len(), 1));
            return Ok(cert);
        }
        // parent[canonical] = (parent canonical, member used, deletion position)
        let mut parent: HashMap<Key, (Key, Key, usize)> = HashMap::new();
        let mut level: Vec<Arc<EquivClass>> = vec![start.clone()];
        cert.classes_per_length.push((a.len(), 1));
        let mut found = false;
        while !level.is_empty() && level[0].length > b.len() {
            let mut next: Vec<Arc<EquivClass>> = Vec::new();
            let mut next_seen: HashSet<Key> = HashSet::new();
            for class in &level {
                let from = class.members[0];
                for &m in &class.members {
                    let n = m.len as usize;
                    for i in 0..n - 1 {
                        if m.letter(i) != m.letter(i + 1) {
                            continue;
                        }
                        let r = m.delete_pair(i);
                        let rc = self.class_of_key(r);
                        let canon = rc.members[0];
                        if next_seen.insert(canon) {
                            parent.insert(canon, (from, m, i));
                            next.push(rc);
                        }
                    }
                }
            }
            let len_next = next.first().map(|c| c.length).unwrap_or(0);
            cert.classes_per_length.push((len_next, next.len()));
            if len_next == b.len() && next_seen.contains(&target_canon) {
                found = true;
                break;
            }
            level = next;
        }
        if found {
            cert.reachable = true;
            cert.mechanism = Mechanism::Search;
            cert.reachable_allowing_zero_steps = true;
            cert.reachable_requiring_a_step = true;
            let mut steps = Vec::new();
            let mut cur = target_canon;
            while let Some(&(from, member, pos)) = parent.get(&cur) {
                steps.push(ReductionStep {
                    from: from.to_word(),
                    rewritten: member.to_word(),
                    position: pos,
                    result: member.delete_pair(pos).to_word(),
                });
                cur = from;
                if from == start.members[0] {
                    break;
                }
            }
            steps.reverse();
            if let Some(first) = steps.first_mut() {
                first.from = a.clone();
            }
            cert.trace = steps;
        } else {
            cert.mechanism = Mechanism::ExhaustedSearch;
        }
        Ok(cert)
    }

    /// Checks that a reachable certificate replays: each step's rewrite is Artin-equivalent
    /// to its input, the deletion removes an equal pair, and the last result is equivalent to the target.
    pub fn replay(&mut self, cert: &ReductionCertificate) -> Result<bool> {
        if !cert.reachable {
            return Ok(false);
        }
        if cert.trace.is_empty() {
            return self.equiv(&cert.source, &cert.target);
        }
        let mut cur = cert.source.clone();
        for s in &cert.trace {
            if !self.equiv(&cur, &s.from)? || !self.equiv(&s.from, &s.rewritten)? {
                return Ok(false);
            }
            let l = &s.rewritten.letters;
            if s.position + 1 >= l.len() || l[s.position] != l[s.position + 1] {
                return Ok(false);
            }
            let mut r = l.clone();
            r.drain(s.position..s.position + 2);
            let r = BraidWord { letters: r };
            if r != s.result {
                return Ok(false);
            }
            cur = r;
        }
        self.equiv(&cur, &cert.target)
    }
}

/// The word families of the non-reduction lemmas.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaFamilies {
    pub n: usize,
    pub a_tilde: BraidWord,
    pub b_tilde: BraidWord,
    pub a_hat: BraidWord,
    pub b_hat: BraidWord,
    /// A_n and B_n, defined for even n only.
    pub a_even: Option<BraidWord>,
    pub b_even: Option<BraidWord>,
}

fn x(n: usize) -> BraidWord {
    BraidWord {
        letters: vec![Letter::X; n],
    }
}

fn y(n: usize) -> BraidWord {
    BraidWord {
        letters: vec![Letter::Y; n],
    }
}

fn cat(parts: &[BraidWord]) -> BraidWord {
    BraidWord {
        letters: parts.iter().flat_map(|p| p.letters.iter().cloned()).collect(),
    }
}

/// Ã_n, B̃_n, Â_n, B̂_n and (for even n) A_n, B_n.
pub fn lemma_families(n: usize) -> Result<LemmaFamilies> {
    if n < 2 {
        return invalid("families are defined for n >= 2");
    }
    let k = n / 2;
    let xyyx = cat(&[x(1), y(2), x(1)]);
    let yxxy = cat(&[y(1), x(2), y(1)]);
    let (a_tilde, b_tilde, a_hat, b_hat) = if n % 2 == 0 {
        (
            cat(&[xyyx.pow(k), y(2 * k)]),
            cat(&[x(2), y(2 * k), x(1), y(2 * k), x(1)]),
            cat(&[yxxy.pow(k), x(2 * k)]),
            cat(&[y(2), x(2 * k), y(1), x(2 * k), y(1)]),
        )
    } else {
        (
            cat(&[xyyx.pow(k), x(1), y(1), x(2 * k + 1)]),
            cat(&[x(2), y(2 * k + 1), x(2 * k + 1), y(1)]),
            cat(&[yxxy.pow(k), y(1), x(1), y(2 * k + 1)]),
            cat(&[y(2), x(2 * k + 1), y(2 * k + 1), x(1)]),
        )
    };
    let (a_even, b_even) = if n % 2 == 0 {
        (
            Some(cat(&[yxxy.pow(k), x(2 * k + 1)])),
            Some(cat(&[y(2), x(2 * k + 1), y(2 * k)])),
        )
    } else {
        (None, None)
    };
    Ok(LemmaFamilies {
        n,
        a_tilde,
        b_tilde,
        a_hat,
        b_hat,
        a_even,
        b_even,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub left: BraidWord,
    pub right: BraidWord,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
    /// Number of words A used for the commutation identity.
    pub commutation_words: usize,
    pub all_hold: bool,
}

/// Every positive word of length 0..=max_len.
pub fn all_words(max_len: usize) -> Vec<BraidWord> {
    let mut out = Vec::new();
    for len in 0..=max_len {
        for bits in 0..(1u64 << len) {
            out.push(
                Key {
                    len: len as u8,
                    bits,
                }
                .to_word(),
            );
        }
    }
    out
}

/// The chain of equalities among length-6 words, Y^{2k}XY = XYX^{2k} and
/// X^{2k}YX = YXY^{2k} for k ≤ kmax, X²YX²Y A = A X²YX²Y for |A| ≤ a_len, and
/// (YX²Y)^k X^{2k} = (YX²YX²)^k = X^{2k}(YX²Y)^k for k ≤ kmax.
pub fn verify_identities(engine: &mut BraidEngine, kmax: usize, a_len: usize) -> Result<IdentityReport> {
    let mut checks = Vec::new();
    let mut push = |engine: &mut BraidEngine, name: String, l: BraidWord, r: BraidWord| -> Result<()> {
        let holds = engine.equiv(&l, &r)?;
        checks.push(IdentityCheck {
            name,
            left: l,
            right: r,
            holds,
        });
        Ok(())
    };
    let chain = ["XY2XY2", "YX2YX2", "XYX2YX", "YXY2XY", "X2YX2Y", "Y2XY2X", "XYXYXY", "YXYXYX"];
    for w in chain.windows(2) {
        push(engine, format!("chain {} = {}", w[0], w[1]), word(w[0]), word(w[1]))?;
    }
    for k in 1..=kmax {
        push(
            engine,
            format!("Y^{}XY = XYX^{}", 2 * k, 2 * k),
            cat(&[y(2 * k), word("XY")]),
            cat(&[word("XY"), x(2 * k)]),
        )?;
        push(
            engine,
            format!("X^{}YX = YXY^{}", 2 * k, 2 * k),
            cat(&[x(2 * k), word("YX")]),
            cat(&[word("YX"), y(2 * k)]),
        )?;
        let yxxy = word("YX2Y");
        let first = cat(&[yxxy.pow(k), x(2 * k)]);
        let middle = word("YX2YX2").pow(k);
        let last = cat(&[x(2 * k), yxxy.pow(k)]);
        push(engine, format!("(YX2Y)^{k}X^{} = (YX2YX2)^{k}", 2 * k), first, middle.clone())?;
        push(engine, format!("(YX2YX2)^{k} = X^{}(YX2Y)^{k}", 2 * k), middle, last)?;
    }
    let central = word("X2YX2Y");
    let words = all_words(a_len);
    let mut commutation_ok = true;
    for a in &words {
        let l = central.concat(a);
        let r = a.concat(&central);
        if !engine.equiv(&l, &r)? {
            commutation_ok = false;
            push(engine, format!("X2YX2Y A = A X2YX2Y for A = {a}"), l, r)?;
        }
    }
    push(
        engine,
        format!("X2YX2Y A = A X2YX2Y for all {} words |A| <= {a_len}", words.len()),
        central.concat(&word("XY")),
        word("XY").concat(&central),
    )?;
    if let Some(last) = checks.last_mut() {
        last.holds = last.holds && commutation_ok;
    }
    let all_hold = checks.iter().all(|c| c.holds);
    Ok(IdentityReport {
        checks,
        commutation_words: words.len(),
        all_hold,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NonReduction {
    pub name: String,
    pub certificate: ReductionCertificate,
    /// True when the certificate shows the target is not reachable.
    pub certified: bool,
}

/// Certificates for Ã_n ⇏ B̃_n and Â_n ⇏ B̂_n (2 ≤ n ≤ n_max) and A_{2k} ⇏ B_{2k} (2k ≤ n_max).
pub fn verify_nonreductions(engine: &mut BraidEngine, n_max: usize) -> Result<Vec<NonReduction>> {
    let mut out = Vec::new();
    for n in 2..=n_max {
        let f = lemma_families(n)?;
        let mut cases = vec![
            (format!("A~{n} -/-> B~{n}"), f.a_tilde.clone(), f.b_tilde.clone()),
            (format!("A^{n} -/-> B^{n}"), f.a_hat.clone(), f.b_hat.clone()),
        ];
        if let (Some(a), Some(b)) = (f.a_even.clone(), f.b_even.clone()) {
            cases.push((format!("A{n} -/-> B{n}"), a, b));
        }
        for (name, a, b) in cases {
            let certificate = engine.reduce_reachable(&a, &b)?;
            out.push(NonReduction {
                name,
                certified: !certificate.reachable_allowing_zero_steps,
                certificate,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CancellationReport {
    pub trials: usize,
    /// Trials in which H A ⇒ H B (resp. A H ⇒ B H) held.
    pub left_premises: usize,
    pub right_premises: usize,
    pub violations: Vec<(BraidWord, BraidWord, BraidWord)>,
}

fn random_word(rng: &mut StdRng, len: usize) -> BraidWord {
    BraidWord {
        letters: (0..len)
            .map(|_| if rng.gen::<bool>() { Letter::X } else { Letter::Y })
            .collect(),
    }
}

/// Random reduct of `a`: a few random Artin moves and pair deletions.
fn random_reduct(engine: &mut BraidEngine, rng: &mut StdRng, a: &BraidWord) -> BraidWord {
    let mut cur = a.key();
    let steps = rng.gen_range(0..=2usize);
    for _ in 0..steps {
        let class = engine.class_of_key(cur);
        let m = class.members[rng.gen_range(0..class.members.len())];
        let n = m.len as usize;
        let spots: Vec<usize> = (0..n.saturating_sub(1)).filter(|&i| m.letter(i) == m.letter(i + 1)).collect();
        if spots.is_empty() {
            break;
        }
        cur = m.delete_pair(spots[rng.gen_range(0..spots.len())]);
    }
    cur.to_word()
}

/// Randomized check of left and right cancellation for reachability.
pub fn cancellation_test(engine: &mut BraidEngine, trials: usize, bound: usize, seed: u64) -> Result<CancellationReport> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut report = CancellationReport {
        trials,
        left_premises: 0,
        right_premises: 0,
        violations: Vec::new(),
    };
    for _ in 0..trials {
        let hl = rng.gen_range(0..=bound.min(4));
        let al = rng.gen_range(0..=(bound - hl));
        let h = random_word(&mut rng, hl);
        let a = random_word(&mut rng, al);
        let b = if rng.gen::<bool>() {
            random_reduct(engine, &mut rng, &a)
        } else {
            let bl = rng.gen_range(0..=al);
            random_word(&mut rng, bl)
        };
        let ab = engine.reduce_reachable(&a, &b)?.reachable;
        if engine.reduce_reachable(&h.concat(&a), &h.concat(&b))?.reachable {
            report.left_premises += 1;
            if !ab {
                report.violations.push((h.clone(), a.clone(), b.clone()));
            }
        }
        if engine.reduce_reachable(&a.concat(&h), &b.concat(&h))?.reachable {
            report.right_premises += 1;
            if !ab {
                report.violations.push((h, a, b));
            }
        }
    }
    Ok(report)
}

/// Which adjacent pair of value-ordered strands each generator crosses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GeneratorOrder {
    /// X = crossing of the two lowest strands, Y = the two highest.
    BottomIsX,
    BottomIsY,
}

impl Default for GeneratorOrder {
    fn default() -> Self {
        GeneratorOrder::BottomIsX
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodedBraid {
    pub word: BraidWord,
    pub convention: GeneratorOrder,
    /// (position, lower strand index, upper strand index) per crossing, strand indices as given.
    pub crossings: Vec<(f64, usize, usize)>,
}

/// Scans three curves left to right and emits a generator at each crossing.
///
/// Differences within `tol` of zero at an endpoint, crossings with slope of the
/// difference below `slope_tol`, and two crossings at the same place are rejected.
pub fn encode(
    curves: [&GridFunction; 3],
    convention: GeneratorOrder,
    tol: f64,
    slope_tol: f64,
) -> Result<EncodedBraid> {
    let xs = curves[0].nodes();
    if curves.iter().any(|c| c.nodes() != xs) {
        return invalid("curves must share a grid");
    }
    let n = xs.len();
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    for &(i, j) in &pairs {
        for end in [0, n - 1] {
            if (curves[i].values[end] - curves[j].values[end]).abs() <= tol {
                return invalid(format!("curves {i} and {j} meet at an endpoint"));
            }
        }
    }
    let mut order: Vec<usize> = vec![0, 1, 2];
    order.sort_by(|&a, &b| curves[a].values[0].partial_cmp(&curves[b].values[0]).unwrap());
    let mut crossings = Vec::new();
    let mut letters = Vec::new();
    // last significant sign of each pair difference
    let diff = |i: usize, j: usize, k: usize| curves[i].values[k] - curves[j].values[k];
    let mut last: Vec<(usize, f64)> = pairs.iter().map(|&(i, j)| (0, diff(i, j, 0))).collect();
    for k in 1..n {
        let mut events: Vec<(f64, usize, usize)> = Vec::new();
        for (pi, &(i, j)) in pairs.iter().enumerate() {
            let d = diff(i, j, k);
            if d.abs() <= tol {
                continue;
            }
            let (kl, dl) = last[pi];
            if dl.signum() != d.signum() {
                let x0 = xs[kl];
                let x1 = xs[k];
                let slope = (d - dl) / (x1 - x0);
                if slope.abs() < slope_tol {
                    return invalid(format!("tangential intersection of curves {i} and {j} near x = {x0}"));
                }
                let xc = x0 + (x1 - x0) * dl / (dl - d);
                events.push((xc, i, j));
            }
            last[pi] = (k, d);
        }
        events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in events.windows(2) {
            if (w[1].0 - w[0].0).abs() <= 1e-12 * (1.0 + w[0].0.abs()) {
                return invalid(format!("triple point near x = {}", w[0].0));
            }
        }
        for (xc, i, j) in events {
            let pi = order.iter().position(|&s| s == i).unwrap();
            let pj = order.iter().position(|&s| s == j).unwrap();
            let (lo, hi) = if pi < pj { (pi, pj) } else { (pj, pi) };
            if hi != lo + 1 {
                return invalid(format!("non-adjacent strands cross near x = {xc}; refine the sampling"));
            }
            let bottom = lo == 0;
            let letter = match (convention, bottom) {
                (GeneratorOrder::BottomIsX, true) | (GeneratorOrder::BottomIsY, false) => Letter::X,
                _ => Letter::Y,
            };
            letters.push(letter);
            crossings.push((xc, order[lo], order[hi]));
            order.swap(lo, hi);
        }
    }
    Ok(EncodedBraid {
        word: BraidWord { letters },
        convention,
        crossings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!(word("XY2X").to_string(), "XYYX");
        assert_eq!(word("I").to_string(), "I");
        assert!("XZ".parse::<BraidWord>().is_err());
    }

    #[test]
    fn small_classes() {
        let mut e = BraidEngine::default();
        let c = e.artin_class(&word("XYX")).unwrap();
        assert_eq!(c.size, 2);
        assert_eq!(c.canonical, word("XYX"));
        let id = e.artin_class(&BraidWord::identity()).unwrap();
        assert_eq!(id.size, 1);
        assert!(e.equiv(&word("XYX"), &word("YXY")).unwrap());
        assert!(!e.equiv(&word("X"), &word("Y")).unwrap());
    }

    #[test]
    fn key_deletion() {
        let k = word("XYYXX").key();
        assert_eq!(k.delete_pair(1).to_word(), word("XXX"));
        assert_eq!(k.delete_pair(3).to_word(), word("XYY"));
    }

    #[test]
    fn reduction_to_identity() {
        let mut e = BraidEngine::default();
        let c = e.reduce_reachable(&word("X2YX2Y"), &BraidWord::identity()).unwrap();
        assert!(c.reachable);
        assert_eq!(c.deletions, 3);
        assert!(e.replay(&c).unwrap());
    }

    #[test]
    fn bound_enforced() {
        let mut e = BraidEngine::new(4).unwrap();
        assert!(matches!(
            e.artin_class(&word("XYXYX")),
            Err(Error::LengthBound { .. })
        ));
    }
}
