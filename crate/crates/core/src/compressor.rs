//! Deterministic code lengths for binary strings.
//!
//! Two coders are provided:
//!
//! * [`Coder::Ctw`] (the default): ideal code length of an equal-weight mixture of two
//!   context-tree-weighting models of depth 16, one over the plain bit stream and one with a
//!   separate tree per bit position modulo 8 (the usual byte-oriented layout). The length is
//!   `⌈-log₂ P⌉ + 1`, the size an arithmetic coder would emit. Point representations in `ℝⁿ`
//!   add a model whose trees follow position modulo `4n` (see [`ctw_point_len`]).
//! * [`Coder::Lz78`]: LZ78 where each phrase is emitted as a dictionary index plus one literal
//!   bit, costing `⌈log₂ d⌉ + 1` bits for dictionary size `d`. A trailing partial phrase is
//!   charged the same way.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub const CTW_DEPTH: usize = 16;
pub const CTW_PERIOD: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coder {
    #[default]
    Ctw,
    Lz78,
}

impl Coder {
    pub fn code_len(self, bits: &[bool]) -> u64 {
        match self {
            Coder::Ctw => ctw_len(bits),
            Coder::Lz78 => lz78_len(bits),
        }
    }

    /// Code length of a point representation in `ℝⁿ`.
    pub fn point_code_len(self, bits: &[bool], n: usize) -> u64 {
        match self {
            Coder::Ctw => ctw_point_len(bits, n),
            Coder::Lz78 => lz78_len(bits),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Coder::Ctw => "ctw",
            Coder::Lz78 => "lz78",
        }
    }
}

#[derive(Clone, Copy)]
struct Node {
    child: [u32; 2],
    zeros: u32,
    ones: u32,
    /// `P_e / (P_w⁰ · P_w¹)`, the odds of the node's own estimate against its split.
    beta: f64,
}

const EMPTY: Node = Node { child: [0, 0], zeros: 0, ones: 0, beta: 1.0 };

// Keeps `beta` finite; the mixture weight is saturated long before these bounds.
const BETA_MIN: f64 = 1e-250;
const BETA_MAX: f64 = 1e250;

/// `log₂ P(bits)` under a context-tree-weighting model with Krichevsky–Trofimov leaves. With
/// `period > 1` the position modulo `period` selects one of `period` independent trees.
///
/// Each node keeps the odds `β` of its estimate against its split, so the conditional weighted
/// probability of the next bit is `(β·p_e + p_split)/(β + 1)`, computed leaf to root.
fn ctw_log_prob(bits: &[bool], depth: usize, period: usize) -> f64 {
    let mut nodes = vec![EMPTY; period];
    let mut path = Vec::with_capacity(depth + 1);
    let mut total = 0.0;
    for (t, &x) in bits.iter().enumerate() {
        path.clear();
        let mut cur = t % period;
        path.push(cur);
        for d in 0..depth {
            // Bits before the start of the string read as zero.
            let c = (t > d && bits[t - 1 - d]) as usize;
            let mut next = nodes[cur].child[c] as usize;
            if next == 0 {
                next = nodes.len();
                nodes.push(EMPTY);
                nodes[cur].child[c] = next as u32;
            }
            cur = next;
            path.push(cur);
        }
        let mut p = 0.0;
        for (level, &id) in path.iter().enumerate().rev() {
            let n = &mut nodes[id];
            let seen = if x { n.ones } else { n.zeros } as f64;
            let pe = (seen + 0.5) / ((n.zeros + n.ones) as f64 + 1.0);
            if x {
                n.ones += 1;
            } else {
                n.zeros += 1;
            }
            p = if level == depth {
                pe
            } else {
                let pw = (n.beta * pe + p) / (n.beta + 1.0);
                n.beta = (n.beta * pe / p).clamp(BETA_MIN, BETA_MAX);
                pw
            };
        }
        total += p.log2();
    }
    total
}

/// `log₂(½·2^a + ½·2^b)`.
fn log_mix(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    hi - 1.0 + (1.0 + (-(a - b).abs()).exp2()).log2()
}

/// Code length in bits of `bits` under the default context-tree-weighting mixture.
pub fn ctw_len(bits: &[bool]) -> u64 {
    if bits.is_empty() {
        return 0;
    }
    let plain = ctw_log_prob(bits, CTW_DEPTH, 1);
    let aligned = ctw_log_prob(bits, CTW_DEPTH, CTW_PERIOD);
    (-log_mix(plain, aligned)).ceil() as u64 + 1
}

/// Code length of the precision-`r` representation of a point in `ℝⁿ`. An aligned model with
/// period `4n`, four rows of interleaved bits, joins the mixture when it differs from the byte
/// period.
pub fn ctw_point_len(bits: &[bool], n: usize) -> u64 {
    if bits.is_empty() {
        return 0;
    }
    if 4 * n == CTW_PERIOD {
        return ctw_len(bits);
    }
    let logs = [
        ctw_log_prob(bits, CTW_DEPTH, 1),
        ctw_log_prob(bits, CTW_DEPTH, CTW_PERIOD),
        ctw_log_prob(bits, CTW_DEPTH, 4 * n),
    ];
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mix = hi + logs.iter().map(|l| (l - hi).exp2()).sum::<f64>().log2() - 3f64.log2();
    (-mix).ceil() as u64 + 1
}

fn ceil_log2(d: usize) -> u64 {
    if d <= 1 {
        0
    } else {
        (usize::BITS - (d - 1).leading_zeros()) as u64
    }
}

/// Length in bits of the LZ78 encoding of `bits`.
pub fn lz78_len(bits: &[bool]) -> u64 {
    // Binary trie: node id -> children.
    let mut trie: Vec<[u32; 2]> = vec![[0, 0]];
    let mut total = 0u64;
    let mut node = 0usize;
    let mut pending = false;
    for &b in bits {
        let child = trie[node][b as usize];
        if child != 0 {
            node = child as usize;
            pending = true;
        } else {
            total += ceil_log2(trie.len()) + 1;
            let id = trie.len() as u32;
            trie[node][b as usize] = id;
            trie.push([0, 0]);
            node = 0;
            pending = false;
        }
    }
    if pending {
        total += ceil_log2(trie.len()) + 1;
    }
    total
}

/// LZ78 code lengths of every prefix of `bits` whose length appears in `cuts`, in one pass.
/// `cuts` must be ascending.
pub fn lz78_prefix_lens(bits: &[bool], cuts: &[usize]) -> Vec<u64> {
    let mut trie: Vec<[u32; 2]> = vec![[0, 0]];
    let mut total = 0u64;
    let mut node = 0usize;
    let mut out = Vec::with_capacity(cuts.len());
    let mut next_cut = cuts.iter().peekable();
    let mut emit = |pos: usize, node: usize, total: u64, dict: usize, out: &mut Vec<u64>| {
        while let Some(&&c) = next_cut.peek() {
            if c != pos {
                break;
            }
            let partial = if node != 0 { ceil_log2(dict) + 1 } else { 0 };
            out.push(total + partial);
            next_cut.next();
        }
    };
    emit(0, 0, 0, 1, &mut out);
    for (i, &b) in bits.iter().enumerate() {
        let child = trie[node][b as usize];
        if child != 0 {
            node = child as usize;
        } else {
            total += ceil_log2(trie.len()) + 1;
            let id = trie.len() as u32;
            trie[node][b as usize] = id;
            trie.push([0, 0]);
            node = 0;
        }
        emit(i + 1, node, total, trie.len(), &mut out);
    }
    out
}

/// Number of LZ78 phrases, for diagnostics.
pub fn lz78_phrases(bits: &[bool]) -> usize {
    let mut dict: HashMap<(usize, bool), usize> = HashMap::new();
    let mut node = 0usize;
    let mut count = 0;
    for &b in bits {
        match dict.get(&(node, b)) {
            Some(&c) => node = c,
            None => {
                count += 1;
                let id = dict.len() + 1;
                dict.insert((node, b), id);
                node = 0;
            }
        }
    }
    count + usize::from(node != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn small_parse() {
        // 0 | 1 | 00 | 01 -> costs 1, 2, 3, 3
        assert_eq!(lz78_phrases(&bits("010001")), 4);
        assert_eq!(lz78_len(&bits("010001")), 9);
        // trailing partial phrase "0" with dictionary size 5 costs 4
        assert_eq!(lz78_len(&bits("0100010")), 13);
        assert_eq!(lz78_len(&[]), 0);
    }

    #[test]
    fn prefix_lengths_agree() {
        let s = bits("0110100110010110100101100110100110010110");
        let cuts: Vec<usize> = (0..=s.len()).collect();
        let got = lz78_prefix_lens(&s, &cuts);
        for (c, g) in cuts.iter().zip(got) {
            assert_eq!(g, lz78_len(&s[..*c]), "prefix {c}");
        }
    }

    #[test]
    fn ctw_basics() {
        assert_eq!(ctw_len(&[]), 0);
        // A single bit: both models predict 1/2, so the mixture codes it in 1 bit (+1).
        assert_eq!(ctw_len(&[true]), 2);
        let z = vec![false; 1 << 14];
        assert!(ctw_len(&z) < 64);
        let alt: Vec<bool> = (0..1 << 14).map(|i| i % 2 == 1).collect();
        assert!(ctw_len(&alt) < 64);
    }

    #[test]
    fn ctw_random_is_incompressible() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let bits: Vec<bool> = (0..1 << 14)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state & 1 == 1
            })
            .collect();
        let len = ctw_len(&bits) as f64 / bits.len() as f64;
        assert!((0.99..1.03).contains(&len), "{len}");
    }

    #[test]
    fn coder_dispatch() {
        let s = bits("0100010");
        assert_eq!(Coder::Lz78.code_len(&s), 13);
        assert_eq!(Coder::Ctw.code_len(&s), ctw_len(&s));
        assert_eq!(Coder::Ctw.point_code_len(&s, 2), ctw_len(&s));
        assert_eq!(Coder::Ctw.point_code_len(&s, 3), ctw_point_len(&s, 3));
        assert_eq!(Coder::Lz78.point_code_len(&s, 3), 13);
        assert_eq!(Coder::default(), Coder::Ctw);
    }

    #[test]
    fn constant_string_compresses() {
        let z = vec![false; 1 << 16];
        assert!(lz78_len(&z) < 8000);
    }
}
