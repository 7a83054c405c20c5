use std::collections::HashMap;

use mdimlab::bits::BitString;
use mdimlab::machine::{enumerate_halting, kraft_mass, run, Enumeration, MachineConfig, Program, RunStatus};
use mdimlab::pinned;

fn small() -> MachineConfig {
    MachineConfig::new(12, 300)
}

#[test]
fn halting_programs_are_prefix_free() {
    let halting = enumerate_halting(&small(), &BitString::new()).unwrap();
    assert!(!halting.is_empty());
    for a in &halting {
        for b in &halting {
            assert!(!a.program.bits().is_proper_prefix_of(b.program.bits()), "{} / {}", a.program, b.program);
        }
    }
}

#[test]
fn kraft_mass_matches_a_float_recount() {
    let cfg = small();
    let halting = enumerate_halting(&cfg, &BitString::new()).unwrap();
    let recount: f64 = halting.iter().map(|e| 2f64.powi(-(e.program.len() as i32))).sum();
    let mass = kraft_mass(&cfg).unwrap().to_f64();
    assert!(mass <= 1.0);
    assert!((mass - recount).abs() < 1e-12, "{mass} vs {recount}");
}

#[test]
fn pinned_kraft_mass_reproduces() {
    let mass = kraft_mass(&MachineConfig::v0_small()).unwrap().to_f64();
    assert_eq!(mass, pinned::KRAFT_MASS_V0);
}

#[test]
fn exact_k_is_the_shortest_program() {
    let cfg = small();
    let en = Enumeration::build(&cfg).unwrap();
    let mut shortest: HashMap<BitString, usize> = HashMap::new();
    for e in enumerate_halting(&cfg, &BitString::new()).unwrap() {
        let slot = shortest.entry(e.output).or_insert(usize::MAX);
        *slot = (*slot).min(e.program.len());
    }
    for (out, len) in &shortest {
        assert_eq!(en.k(out), Some(*len as u64));
    }
}

#[test]
fn enumerated_programs_rerun_identically() {
    let cfg = small();
    for e in enumerate_halting(&cfg, &BitString::new()).unwrap().iter().take(200) {
        let res = run(&e.program, &BitString::new(), &cfg);
        assert_eq!(res.status, RunStatus::Halted);
        assert_eq!(res.output.as_ref(), Some(&e.output));
        assert!(res.steps_used <= cfg.step_budget);
    }
}

#[test]
fn larger_budget_keeps_every_halting_program() {
    let lo = enumerate_halting(&MachineConfig::new(12, 50), &BitString::new()).unwrap();
    let hi = enumerate_halting(&MachineConfig::new(12, 500), &BitString::new()).unwrap();
    let hi: HashMap<&Program, &BitString> = hi.iter().map(|e| (&e.program, &e.output)).collect();
    for e in &lo {
        assert_eq!(hi.get(&e.program), Some(&&e.output));
    }
}

#[test]
fn conditioning_never_costs_more() {
    let en = Enumeration::build(&small()).unwrap();
    let given = BitString::from_bits(vec![true, false, true]);
    for (out, _) in en.outputs().take(50) {
        if let (Some(k), Some(kc)) = (en.k(out), en.k_given(out, &given)) {
            assert!(kc <= k, "{out}: {kc} vs {k}");
        }
    }
}
