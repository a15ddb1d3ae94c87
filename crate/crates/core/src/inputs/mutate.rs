//! Seeded, tag-preserving mutation of argument tuples.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::literal::InputTuple;
use crate::num::Int;
use crate::tracer::{Dict, Set, Value};

#[derive(Clone, Debug)]
pub struct MutationPolicy {
    pub master_seed: u64,
    /// Inclusive magnitude range of integer deltas.
    pub int_delta: (i64, i64),
    /// Factors used by the float scale heuristic.
    pub float_scales: Vec<f64>,
    /// Half-width of the float perturbation, rounded to one decimal.
    pub float_delta: f64,
    pub alphabet: String,
    pub max_str_len: usize,
    pub max_container: usize,
    /// Element appended to an empty container.
    pub default_element: Value,
    pub max_attempts_per_round: usize,
    pub max_rounds: usize,
}

impl Default for MutationPolicy {
    fn default() -> Self {
        MutationPolicy {
            master_seed: 0,
            int_delta: (1, 3),
            float_scales: alloc::vec![0.5, 2.0],
            float_delta: 3.0,
            alphabet: String::from("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-!?,."),
            max_str_len: 16,
            max_container: 10,
            default_element: Value::int(0),
            max_attempts_per_round: 16,
            max_rounds: 64,
        }
    }
}

impl MutationPolicy {
    pub fn with_seed(master_seed: u64) -> Self {
        MutationPolicy { master_seed, ..Default::default() }
    }
}

/// Generator for one `(seed, program, round)` triple.
pub fn stream(master_seed: u64, program_id: &str, round: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update((program_id.len() as u64).to_le_bytes());
    h.update(program_id.as_bytes());
    h.update(round.to_le_bytes());
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

/// Perturbs every argument of `base` once. Repeated draws are made while the
/// result equals the base and some argument can change.
pub fn mutate(base: &InputTuple, policy: &MutationPolicy, program_id: &str, round: u64) -> InputTuple {
    let mut rng = stream(policy.master_seed, program_id, round);
    let mut out = base.clone();
    for _ in 0..8 {
        let m = Mutator { policy, rng: &mut rng };
        out = InputTuple::new(m.tuple(&base.positional));
        if out.canonical_text != base.canonical_text {
            break;
        }
    }
    out
}

struct Mutator<'a> {
    policy: &'a MutationPolicy,
    rng: &'a mut ChaCha8Rng,
}

impl Mutator<'_> {
    fn tuple(mut self, args: &[Value]) -> Vec<Value> {
        args.iter().map(|v| self.value(v)).collect()
    }

    fn value(&mut self, v: &Value) -> Value {
        match v {
            Value::Bool(b) => Value::Bool(!b),
            Value::Int(i) => Value::Int(self.int(i)),
            Value::Float(f) => Value::Float(self.float(*f)),
            Value::Str(s) => Value::str(&self.string(s)),
            Value::List(l) => {
                let items = l.borrow().clone();
                Value::list(self.seq(items))
            }
            Value::Tuple(t) => Value::tuple(self.seq(t.to_vec())),
            Value::Dict(d) => Value::dict(self.dict(&d.borrow())),
            Value::Set(s) => Value::set(self.set(&s.borrow())),
            other => other.deep_copy(),
        }
    }

    fn int(&mut self, i: &Int) -> Int {
        let (lo, hi) = self.policy.int_delta;
        match self.rng.gen_range(0..4) {
            0 => i.add(&Int::from(self.rng.gen_range(lo..=hi))),
            1 => i.sub(&Int::from(self.rng.gen_range(lo..=hi))),
            2 => i.neg(),
            _ => Int::zero(),
        }
    }

    fn float(&mut self, f: f64) -> f64 {
        let r = match self.rng.gen_range(0..3) {
            0 => f * *self.policy.float_scales.choose(self.rng).unwrap_or(&2.0),
            1 => {
                let d = self.policy.float_delta;
                let raw = f + self.rng.gen_range(-d..=d);
                libm::round(raw * 10.0) / 10.0
            }
            _ => -f,
        };
        let r = if r == 0.0 { 0.0 } else { r };
        if r.is_finite() { r } else { f }
    }

    fn char(&mut self, s: &[char]) -> char {
        let alpha: Vec<char> = self.policy.alphabet.chars().collect();
        if !s.is_empty() && self.rng.gen_bool(0.5) {
            s[self.rng.gen_range(0..s.len())]
        } else {
            alpha.choose(self.rng).copied().unwrap_or('a')
        }
    }

    fn string(&mut self, s: &str) -> String {
        let mut cs: Vec<char> = s.chars().collect();
        let op = if cs.is_empty() { 0 } else { self.rng.gen_range(0..4) };
        match op {
            0 if cs.len() < self.policy.max_str_len => {
                let at = self.rng.gen_range(0..=cs.len());
                let c = self.char(&cs);
                cs.insert(at, c);
            }
            0 | 1 => {
                if !cs.is_empty() {
                    cs.remove(self.rng.gen_range(0..cs.len()));
                }
            }
            2 => {
                let at = self.rng.gen_range(0..cs.len());
                cs[at] = self.char(&cs);
            }
            _ => {
                let at = self.rng.gen_range(0..cs.len());
                let c = cs[at];
                cs[at] = if c.is_uppercase() {
                    c.to_lowercase().next().unwrap_or(c)
                } else {
                    c.to_uppercase().next().unwrap_or(c)
                };
            }
        }
        cs.into_iter().collect()
    }

    /// A new element resembling the existing ones.
    fn fresh(&mut self, items: &[Value]) -> Value {
        match items.choose(self.rng) {
            Some(v) if self.rng.gen_bool(0.3) => v.deep_copy(),
            Some(v) => self.value(v),
            None => self.policy.default_element.deep_copy(),
        }
    }

    fn seq(&mut self, mut items: Vec<Value>) -> Vec<Value> {
        let op = if items.is_empty() { 1 } else { self.rng.gen_range(0..3) };
        match op {
            0 => {
                let at = self.rng.gen_range(0..items.len());
                items[at] = self.value(&items[at]);
            }
            1 if items.len() < self.policy.max_container => {
                let v = self.fresh(&items);
                let at = self.rng.gen_range(0..=items.len());
                items.insert(at, v);
            }
            _ => {
                if !items.is_empty() {
                    items.remove(self.rng.gen_range(0..items.len()));
                }
            }
        }
        items
    }

    fn dict(&mut self, d: &Dict) -> Dict {
        let mut entries: Vec<(Value, Value)> = d.entries().iter().map(|(k, v)| (k.deep_copy(), v.deep_copy())).collect();
        let op = if entries.is_empty() { 1 } else { self.rng.gen_range(0..3) };
        match op {
            0 => {
                let at = self.rng.gen_range(0..entries.len());
                entries[at].1 = self.value(&entries[at].1);
            }
            1 if entries.len() < self.policy.max_container => {
                let keys: Vec<Value> = entries.iter().map(|e| e.0.clone()).collect();
                let vals: Vec<Value> = entries.iter().map(|e| e.1.clone()).collect();
                let k = match keys.choose(self.rng) {
                    Some(k) => self.value(k),
                    None => Value::str(&self.string("")),
                };
                let v = self.fresh(&vals);
                entries.push((k, v));
            }
            _ => {
                if !entries.is_empty() {
                    entries.remove(self.rng.gen_range(0..entries.len()));
                }
            }
        }
        let mut out = Dict::new();
        for (k, v) in entries {
            if out.contains(&k).unwrap_or(true) {
                continue;
            }
            let _ = out.insert(k, v);
        }
        out
    }

    fn set(&mut self, s: &Set) -> Set {
        let items = self.seq(s.items().iter().map(Value::deep_copy).collect());
        let mut out = Set::new();
        for v in items {
            let _ = out.insert(v);
        }
        out
    }
}
