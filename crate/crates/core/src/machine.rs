//! A small self-delimiting byte-code machine with a step budget, and exhaustive enumeration of its
//! halting programs.
//!
//! A program is `gamma(L + 1) · payload` where `L = |payload|`. The length header makes the set of
//! well-formed programs prefix-free. The payload is a sequence of 3-bit opcodes, some followed by
//! gamma-coded arguments, and must be consumed exactly:
//!
//! | opcode | mnemonic          | argument(s)                   | effect                                   |
//! |--------|-------------------|-------------------------------|------------------------------------------|
//! | `000`  | `emit0`           |                               | append `0`                               |
//! | `001`  | `emit1`           |                               | append `1`                               |
//! | `010`  | `echo`            |                               | append the conditional input             |
//! | `011`  | `repeat k`        | `gamma(k)`, `k ≥ 1`           | append the last `min(k, |out|)` bits     |
//! | `100`  | `literal len b…`  | `gamma(len)` then `len` bits  | append the bits                          |
//! | `101`  | `jump t`          | `gamma(t + 1)`                | if counter > 0: counter -= 1, goto `t`   |
//! | `110`  | `load k`          | `gamma(k + 1)`                | counter := k                             |
//! | `111`  | `halt`            |                               | stop                                     |
//!
//! Running off the end of the instruction list (or jumping past it) also halts. Every executed
//! instruction costs one step and every appended bit costs one more; exceeding the budget is
//! `out_of_budget`, which every mass and K computation treats as non-halting.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{BitReader, BitString};
use crate::codec::{self, DyadicRational, RationalPoint};
use crate::error::{Error, Result};

/// Semantics tag. Every pinned machine-relative constant is recorded against it.
pub const MACHINE_VERSION: &str = "v0";

/// Default cap on the number of candidate programs examined by one enumeration.
pub const DEFAULT_ITEM_CAP: u64 = 1 << 25;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MachineConfig {
    pub max_program_len: usize,
    pub step_budget: u64,
    #[serde(default = "default_version")]
    pub version_tag: String,
    #[serde(default = "default_item_cap")]
    pub item_cap: u64,
}

fn default_version() -> String {
    MACHINE_VERSION.to_string()
}

fn default_item_cap() -> u64 {
    DEFAULT_ITEM_CAP
}

impl MachineConfig {
    pub fn new(max_program_len: usize, step_budget: u64) -> Self {
        MachineConfig {
            max_program_len,
            step_budget: step_budget.max(1),
            version_tag: MACHINE_VERSION.to_string(),
            item_cap: DEFAULT_ITEM_CAP,
        }
    }

    /// The small pinned configuration used by the Kraft regression (`max_len 16`, budget `10³`).
    pub fn v0_small() -> Self {
        MachineConfig::new(16, 1_000)
    }

    /// The configuration used for point-based experiments (counting and coding bounds, exact
    /// `K_r`): the shortest length at which every dimension up to three has several points.
    pub fn v0_geometry() -> Self {
        MachineConfig::new(30, 1_000)
    }

    pub fn validate(&self) -> Result<()> {
        if self.step_budget == 0 {
            return Err(Error::InvalidConfig("step_budget must be ≥ 1".into()));
        }
        if self.version_tag != MACHINE_VERSION {
            return Err(Error::InvalidConfig(format!(
                "machine version {:?} not supported (this build implements {MACHINE_VERSION})",
                self.version_tag
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Program(pub BitString);

impl Program {
    pub fn bits(&self) -> &BitString {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for Program {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Halted,
    OutOfBudget,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub status: RunStatus,
    pub output: Option<BitString>,
    pub steps_used: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Instr {
    Emit(bool),
    Echo,
    Repeat(u64),
    Literal(Vec<bool>),
    Jump(u64),
    Load(u64),
    Halt,
}

/// Parse the header and payload. `None` when the bits are not exactly one program.
fn parse(bits: &[bool]) -> Option<Vec<Instr>> {
    let mut rd = BitReader::new(bits);
    let payload_len = codec::read_gamma_u64(&mut rd)? - 1;
    if rd.remaining() as u64 != payload_len {
        return None;
    }
    parse_payload(rd.rest())
}

fn parse_payload(payload: &[bool]) -> Option<Vec<Instr>> {
    let mut rd = BitReader::new(payload);
    let mut out = Vec::new();
    while rd.remaining() > 0 {
        let op = rd.read_slice(3)?;
        let code = (op[0] as u8) << 2 | (op[1] as u8) << 1 | op[2] as u8;
        let instr = match code {
            0b000 => Instr::Emit(false),
            0b001 => Instr::Emit(true),
            0b010 => Instr::Echo,
            0b011 => Instr::Repeat(codec::read_gamma_u64(&mut rd)?),
            0b100 => {
                let len = codec::read_gamma_u64(&mut rd)?;
                Instr::Literal(rd.read_slice(len as usize)?.to_vec())
            }
            0b101 => Instr::Jump(codec::read_gamma_u64(&mut rd)? - 1),
            0b110 => Instr::Load(codec::read_gamma_u64(&mut rd)? - 1),
            _ => Instr::Halt,
        };
        out.push(instr);
    }
    Some(out)
}

fn execute(code: &[Instr], given: &BitString, budget: u64) -> RunResult {
    let mut out: Vec<bool> = Vec::new();
    let mut pc = 0usize;
    let mut counter = 0u64;
    let mut steps = 0u64;
    let over = |steps: u64| steps > budget;
    while let Some(instr) = code.get(pc) {
        steps += 1;
        if over(steps) {
            return RunResult { status: RunStatus::OutOfBudget, output: None, steps_used: steps };
        }
        pc += 1;
        match instr {
            Instr::Emit(b) => {
                out.push(*b);
                steps += 1;
            }
            Instr::Echo => {
                out.extend_from_slice(given.bits());
                steps += given.len() as u64;
            }
            Instr::Repeat(k) => {
                let take = (*k).min(out.len() as u64) as usize;
                steps += take as u64;
                if over(steps) {
                    return RunResult { status: RunStatus::OutOfBudget, output: None, steps_used: steps };
                }
                let start = out.len() - take;
                out.extend_from_within(start..);
            }
            Instr::Literal(bits) => {
                out.extend_from_slice(bits);
                steps += bits.len() as u64;
            }
            Instr::Jump(target) => {
                if counter > 0 {
                    counter -= 1;
                    pc = usize::try_from(*target).unwrap_or(usize::MAX);
                }
            }
            Instr::Load(k) => counter = *k,
            Instr::Halt => break,
        }
        if over(steps) {
            return RunResult { status: RunStatus::OutOfBudget, output: None, steps_used: steps };
        }
    }
    RunResult { status: RunStatus::Halted, output: Some(BitString::from_bits(out)), steps_used: steps }
}

/// Run one program on a conditional input.
pub fn run(p: &Program, given: &BitString, cfg: &MachineConfig) -> RunResult {
    match parse(p.bits().bits()) {
        Some(code) => execute(&code, given, cfg.step_budget),
        None => RunResult { status: RunStatus::Invalid, output: None, steps_used: 0 },
    }
}

/// Payload lengths `L` whose programs fit in `max_len`, in increasing order.
fn payload_lengths(max_len: usize) -> impl Iterator<Item = usize> {
    (0usize..)
        .take_while(move |&l| codec::gamma_len(l as u64 + 1) + l <= max_len)
        .take(63)
}

fn program_bits(payload_len: usize, payload: u64) -> Vec<bool> {
    let mut header = BitString::new();
    codec::write_gamma_u64(&mut header, payload_len as u64 + 1);
    let mut bits = header.into_bits();
    bits.extend((0..payload_len).rev().map(|k| (payload >> k) & 1 == 1));
    bits
}

fn candidate_count(cfg: &MachineConfig) -> u64 {
    payload_lengths(cfg.max_program_len).map(|l| 1u64 << l).sum()
}

#[derive(Debug, Clone)]
struct Parsed {
    program: Program,
    code: Vec<Instr>,
    uses_echo: bool,
}

/// All well-formed programs within the length bound, in length-lexicographic order.
fn parse_all(cfg: &MachineConfig) -> Result<Vec<Parsed>> {
    let total = candidate_count(cfg);
    if total > cfg.item_cap {
        return Err(Error::ResourceExceeded(format!(
            "enumeration would examine {total} programs, cap is {}",
            cfg.item_cap
        )));
    }
    let mut out = Vec::new();
    for l in payload_lengths(cfg.max_program_len) {
        let chunk: Vec<Parsed> = (0..1u64 << l)
            .into_par_iter()
            .filter_map(|payload| {
                let bits = program_bits(l, payload);
                let header = bits.len() - l;
                let code = parse_payload(&bits[header..])?;
                let uses_echo = code.iter().any(|i| matches!(i, Instr::Echo));
                Some(Parsed { program: Program(BitString::from_bits(bits)), code, uses_echo })
            })
            .collect();
        out.extend(chunk);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HaltingEntry {
    pub program: Program,
    pub output: BitString,
}

/// Complete list of halting programs for `given`, sorted length-lexicographically.
pub fn enumerate_halting(cfg: &MachineConfig, given: &BitString) -> Result<Vec<HaltingEntry>> {
    let parsed = parse_all(cfg)?;
    Ok(run_all(&parsed, given, cfg.step_budget))
}

fn run_all(parsed: &[Parsed], given: &BitString, budget: u64) -> Vec<HaltingEntry> {
    parsed
        .par_iter()
        .filter_map(|p| {
            let res = execute(&p.code, given, budget);
            (res.status == RunStatus::Halted)
                .then(|| HaltingEntry { program: p.program.clone(), output: res.output.unwrap_or_default() })
        })
        .collect()
}

/// Shortest halting program for a target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KReport {
    pub value: u64,
    pub witness: Program,
    pub exhaustive: bool,
}

/// Per-output minimum: witness is the length-lex-first program producing the output.
type KTable = HashMap<BitString, Program>;

fn build_table(entries: &[HaltingEntry]) -> KTable {
    let mut table = KTable::new();
    for e in entries {
        table.entry(e.output.clone()).or_insert_with(|| e.program.clone());
    }
    table
}

/// A rational point appearing among the machine's outputs, with its exact K.
#[derive(Debug, Clone)]
pub struct PointEntry {
    pub point: RationalPoint,
    pub k: u64,
    pub encoding: BitString,
}

/// A frozen enumeration of the machine under one configuration. All K, conditional K, and
/// a-priori mass queries are answered from it.
pub struct Enumeration {
    cfg: MachineConfig,
    parsed: Vec<Parsed>,
    halting: Vec<HaltingEntry>,
    table: KTable,
    mass: HashMap<BitString, DyadicRational>,
    conditional: Mutex<HashMap<BitString, Arc<KTable>>>,
    points: OnceLock<HashMap<usize, Arc<Vec<PointEntry>>>>,
}

impl std::fmt::Debug for Enumeration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Enumeration")
            .field("cfg", &self.cfg)
            .field("halting", &self.halting.len())
            .finish()
    }
}

impl Enumeration {
    /// Build once per configuration and share across callers in this process.
    pub fn shared(cfg: &MachineConfig) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<MachineConfig, Arc<Enumeration>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(en) = cache.lock().expect("poisoned").get(cfg) {
            return Ok(Arc::clone(en));
        }
        let en = Arc::new(Enumeration::build(cfg)?);
        cache.lock().expect("poisoned").entry(cfg.clone()).or_insert_with(|| Arc::clone(&en));
        Ok(en)
    }

    pub fn build(cfg: &MachineConfig) -> Result<Self> {
        cfg.validate()?;
        let parsed = parse_all(cfg)?;
        let halting = run_all(&parsed, &BitString::new(), cfg.step_budget);
        let table = build_table(&halting);
        let mut mass: HashMap<BitString, DyadicRational> = HashMap::new();
        for e in &halting {
            let w = DyadicRational::pow2_neg(e.program.len() as u32);
            let slot = mass.entry(e.output.clone()).or_insert_with(DyadicRational::zero);
            *slot = &*slot + &w;
        }
        Ok(Enumeration {
            cfg: cfg.clone(),
            parsed,
            halting,
            table,
            mass,
            conditional: Mutex::new(HashMap::new()),
            points: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &MachineConfig {
        &self.cfg
    }

    pub fn halting(&self) -> &[HaltingEntry] {
        &self.halting
    }

    /// Number of distinct outputs.
    pub fn output_count(&self) -> usize {
        self.table.len()
    }

    pub fn outputs(&self) -> impl Iterator<Item = (&BitString, &Program)> {
        self.table.iter()
    }

    fn conditional_table(&self, given: &BitString) -> Arc<KTable> {
        if given.is_empty() {
            return Arc::new(self.table.clone());
        }
        if let Some(t) = self.conditional.lock().expect("poisoned").get(given) {
            return Arc::clone(t);
        }
        // Control flow never depends on the input, so echo-free programs behave exactly as they
        // do unconditionally; only programs containing `echo` need re-running.
        let mut entries: Vec<HaltingEntry> = self
            .halting
            .iter()
            .filter(|e| !self.program_uses_echo(&e.program))
            .cloned()
            .collect();
        let echo: Vec<Parsed> = self.parsed.iter().filter(|p| p.uses_echo).cloned().collect();
        entries.extend(run_all(&echo, given, self.cfg.step_budget));
        entries.sort_by(|a, b| a.program.cmp(&b.program));
        let table = Arc::new(build_table(&entries));
        self.conditional
            .lock()
            .expect("poisoned")
            .insert(given.clone(), Arc::clone(&table));
        table
    }

    fn program_uses_echo(&self, p: &Program) -> bool {
        match self.parsed.binary_search_by(|q| q.program.cmp(p)) {
            Ok(i) => self.parsed[i].uses_echo,
            Err(_) => false,
        }
    }

    /// `K(target | given)` relative to this enumeration; `None` when no enumerated program halts
    /// with the target.
    pub fn exact_k(&self, target: &BitString, given: &BitString) -> Option<KReport> {
        let table = if given.is_empty() { None } else { Some(self.conditional_table(given)) };
        let witness = match &table {
            Some(t) => t.get(target)?,
            None => self.table.get(target)?,
        };
        Some(KReport { value: witness.len() as u64, witness: witness.clone(), exhaustive: true })
    }

    pub fn k(&self, target: &BitString) -> Option<u64> {
        self.table.get(target).map(|p| p.len() as u64)
    }

    pub fn k_given(&self, target: &BitString, given: &BitString) -> Option<u64> {
        self.exact_k(target, given).map(|r| r.value)
    }

    /// `Σ 2^{-|π|}` over all halting programs.
    pub fn kraft_mass(&self) -> DyadicRational {
        self.mass.values().fold(DyadicRational::zero(), |acc, m| &acc + m)
    }

    /// Truncated a-priori mass of a set of outputs.
    pub fn apriori_mass<'a>(&self, targets: impl IntoIterator<Item = &'a BitString>) -> DyadicRational {
        let mut seen = std::collections::HashSet::new();
        targets
            .into_iter()
            .filter(|t| seen.insert(*t))
            .filter_map(|t| self.mass.get(t))
            .fold(DyadicRational::zero(), |acc, m| &acc + m)
    }

    pub fn mass_of(&self, target: &BitString) -> DyadicRational {
        self.mass.get(target).cloned().unwrap_or_else(DyadicRational::zero)
    }

    /// Outputs that are canonical encodings of `n`-dimensional rational points.
    pub fn points(&self, n: usize) -> Arc<Vec<PointEntry>> {
        let all = self.points.get_or_init(|| {
            let mut by_dim: HashMap<usize, Vec<PointEntry>> = HashMap::new();
            for (out, prog) in &self.table {
                if let Some(p) = codec::decode_point_exact(out) {
                    by_dim.entry(p.dimension()).or_default().push(PointEntry {
                        point: p,
                        k: prog.len() as u64,
                        encoding: out.clone(),
                    });
                }
            }
            by_dim
                .into_iter()
                .map(|(n, mut v)| {
                    v.sort_by(|a, b| a.k.cmp(&b.k).then_with(|| a.encoding.cmp(&b.encoding)));
                    (n, Arc::new(v))
                })
                .collect()
        });
        all.get(&n).cloned().unwrap_or_default()
    }

    /// `K(r) = K(s_r)`, the complexity of the `r`-th standard string.
    pub fn k_of_index(&self, r: u64) -> Option<u64> {
        self.k(&BitString::standard(r))
    }

    /// `K` of a natural number written with the integer codec, used where a machine-relative
    /// `K(n)` is needed.
    pub fn k_of_int(&self, z: i64) -> Option<u64> {
        self.k(&codec::encode_int(BigInt::from(z)))
    }
}

/// One-shot `K(target | given)`; builds a full enumeration.
pub fn exact_k(target: &BitString, given: &BitString, cfg: &MachineConfig) -> Result<Option<KReport>> {
    Ok(Enumeration::build(cfg)?.exact_k(target, given))
}

pub fn kraft_mass(cfg: &MachineConfig) -> Result<DyadicRational> {
    Ok(Enumeration::build(cfg)?.kraft_mass())
}

pub fn apriori_mass(targets: &[BitString], cfg: &MachineConfig) -> Result<DyadicRational> {
    Ok(Enumeration::build(cfg)?.apriori_mass(targets))
}

/// Measured symmetry-of-information defect over a set of outputs.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub pairs_checked: usize,
    pub pairs_skipped: usize,
    pub max_defect: i64,
    pub alarm_threshold: i64,
    pub alarm: bool,
}

/// `Δ(x,y) = |K(x,y) − K(x) − K(y | ⟨x, K(x)⟩)|` over all ordered pairs from `strings` whose three
/// terms are found in the enumeration.
pub fn symmetry_of_information(
    en: &Enumeration,
    strings: &[BitString],
    alarm_threshold: i64,
) -> SymmetryReport {
    let mut checked = 0;
    let mut skipped = 0;
    let mut max_defect = 0i64;
    for x in strings {
        let Some(kx) = en.k(x) else {
            skipped += strings.len();
            continue;
        };
        let ctx = codec::pair(x, &codec::encode_int(kx));
        for y in strings {
            let joint = en.k(&codec::pair(x, y));
            let cond = en.k_given(y, &ctx);
            match (joint, cond) {
                (Some(j), Some(c)) => {
                    checked += 1;
                    max_defect = max_defect.max((j as i64 - kx as i64 - c as i64).abs());
                }
                _ => skipped += 1,
            }
        }
    }
    SymmetryReport {
        pairs_checked: checked,
        pairs_skipped: skipped,
        max_defect,
        alarm_threshold,
        alarm: max_defect > alarm_threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prog(s: &str) -> Program {
        Program(s.parse().unwrap())
    }

    #[test]
    fn empty_program_is_invalid() {
        let r = run(&Program(BitString::new()), &BitString::new(), &MachineConfig::v0_small());
        assert_eq!(r.status, RunStatus::Invalid);
        assert!(r.output.is_none());
    }

    #[test]
    fn header_length_must_match() {
        // gamma(4) = 00100 announces a 3-bit payload.
        let cfg = MachineConfig::v0_small();
        assert_eq!(run(&prog("00100001"), &BitString::new(), &cfg).status, RunStatus::Halted);
        assert_eq!(run(&prog("0010000"), &BitString::new(), &cfg).status, RunStatus::Invalid);
        assert_eq!(run(&prog("001000010"), &BitString::new(), &cfg).status, RunStatus::Invalid);
    }

    #[test]
    fn echo_program() {
        let cfg = MachineConfig::v0_small();
        let x: BitString = "1101".parse().unwrap();
        let r = run(&prog("00100010"), &x, &cfg);
        assert_eq!(r.status, RunStatus::Halted);
        assert_eq!(r.output.unwrap(), x);
    }

    #[test]
    fn loop_with_counter() {
        // payload: emit1, load 3 (gamma 4 = 00100), repeat 1 (gamma 1 = 1), jump 2 (gamma 3 = 011)
        let payload = "001".to_string() + "110" + "00100" + "011" + "1" + "101" + "011";
        let mut bits = BitString::new();
        codec::write_gamma_u64(&mut bits, payload.len() as u64 + 1);
        let bits = bits.to_string() + &payload;
        let r = run(&prog(&bits), &BitString::new(), &MachineConfig::new(64, 1000));
        assert_eq!(r.status, RunStatus::Halted);
        assert_eq!(r.output.unwrap().to_string(), "11111");
    }

    #[test]
    fn budget_exhaustion() {
        let cfg = MachineConfig::new(16, 3);
        // emit1 emit1 costs four steps.
        let r = run(&prog("00111001001"), &BitString::new(), &cfg);
        assert_eq!(r.status, RunStatus::OutOfBudget);
        let r = run(&prog("00111001001"), &BitString::new(), &MachineConfig::new(16, 4));
        assert_eq!(r.status, RunStatus::Halted);
        assert_eq!(r.steps_used, 4);
    }

    #[test]
    fn zero_length_bound_is_empty() {
        let cfg = MachineConfig::new(0, 1000);
        assert!(enumerate_halting(&cfg, &BitString::new()).unwrap().is_empty());
        assert!(kraft_mass(&cfg).unwrap().is_zero());
        let en = Enumeration::build(&cfg).unwrap();
        assert!(en.exact_k(&BitString::new(), &BitString::new()).is_none());
    }

    #[test]
    fn item_cap_enforced() {
        let mut cfg = MachineConfig::new(20, 1000);
        cfg.item_cap = 100;
        assert!(matches!(Enumeration::build(&cfg), Err(Error::ResourceExceeded(_))));
    }

    #[test]
    fn first_program_is_lone_header() {
        let list = enumerate_halting(&MachineConfig::v0_small(), &BitString::new()).unwrap();
        assert_eq!(list[0].program.to_string(), "1");
        assert!(list[0].output.is_empty());
    }

    #[test]
    fn echo_cost_is_eight_bits() {
        let en = Enumeration::build(&MachineConfig::v0_small()).unwrap();
        for x in ["0", "1", "0110", "111000111"] {
            let x: BitString = x.parse().unwrap();
            let rep = en.exact_k(&x, &x).unwrap();
            assert_eq!(rep.value, 8, "K({x}|{x})");
        }
    }

    #[test]
    fn version_mismatch_rejected() {
        let mut cfg = MachineConfig::v0_small();
        cfg.version_tag = "v9".into();
        assert!(Enumeration::build(&cfg).is_err());
    }
}
