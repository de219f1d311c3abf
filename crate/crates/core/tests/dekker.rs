//! Dekker verdicts against an independent explicit-state model checker of
//! the same algorithm.

use menu_core::dekker::{dekker_safety, Dekker, MUTANTS};
use std::collections::{BTreeSet, VecDeque};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Pc {
    Start,
    Check,
    Turn,
    Back,
    Wait,
    Retry,
    Enter,
    Body,
    Leave,
    Hand,
    Lower,
    Done,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct St {
    flag: [bool; 2],
    turn_first: bool,
    cs: [bool; 2],
}

/// One atomic move of process `i` (0 or 1).
fn step(i: usize, pc: Pc, s: St, mutant: Option<&str>) -> Option<(Pc, St)> {
    let j = 1 - i;
    let my_turn = s.turn_first == (i == 0);
    let mut t = s;
    let next = match pc {
        Pc::Start => {
            t.flag[i] = true;
            if mutant == Some("nobusy") {
                Pc::Enter
            } else {
                Pc::Check
            }
        }
        Pc::Check => {
            if s.flag[j] {
                Pc::Turn
            } else {
                Pc::Enter
            }
        }
        Pc::Turn => {
            if !my_turn {
                Pc::Back
            } else {
                Pc::Retry
            }
        }
        Pc::Back => {
            t.flag[i] = false;
            Pc::Wait
        }
        Pc::Wait => {
            if my_turn {
                Pc::Check
            } else {
                Pc::Wait
            }
        }
        Pc::Retry => {
            t.flag[i] = true;
            Pc::Check
        }
        Pc::Enter => {
            t.cs[i] = true;
            Pc::Body
        }
        Pc::Body => Pc::Leave,
        Pc::Leave => {
            t.cs[i] = false;
            Pc::Hand
        }
        Pc::Hand => {
            if mutant != Some("noturn") {
                t.turn_first = j == 0;
            }
            Pc::Lower
        }
        Pc::Lower => {
            t.flag[i] = false;
            Pc::Done
        }
        Pc::Done => return None,
    };
    Some((next, t))
}

/// Reachable states from every start store without a process in its
/// critical section, and whether mutual exclusion is violated.
fn explore(mutant: Option<&str>) -> (usize, bool, usize) {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    for k in 0..8u8 {
        let s = St {
            flag: [k & 1 != 0, k & 2 != 0],
            turn_first: k & 4 != 0,
            cs: [false, false],
        };
        if seen.insert((Pc::Start, Pc::Start, s)) {
            queue.push_back((Pc::Start, Pc::Start, s));
        }
    }
    let mut unsafe_ = false;
    let mut xi_failures = 0;
    while let Some((a, b, s)) = queue.pop_front() {
        unsafe_ |= s.cs[0] && s.cs[1];
        let xi = (!s.cs[0] && s.cs[1] && s.flag[1])
            || (!s.cs[1] && s.cs[0] && s.flag[0])
            || (!s.cs[0] && !s.cs[1]);
        if !xi {
            xi_failures += 1;
        }
        for (i, pc) in [(0, a), (1, b)] {
            if let Some((pc2, t)) = step(i, pc, s, mutant) {
                let n = if i == 0 { (pc2, b, t) } else { (a, pc2, t) };
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
    }
    (seen.len(), unsafe_, xi_failures)
}

#[test]
fn checker_reference_values() {
    assert_eq!(explore(None), (180, false, 4));
    assert_eq!(explore(Some("nobusy")).1, true);
    assert_eq!(explore(Some("noturn")).1, false);
}

#[test]
fn verdicts_agree_with_explicit_state_checker() {
    let d = Dekker::load().unwrap();
    for mutant in std::iter::once(None).chain(MUTANTS.iter().map(|m| Some(*m))) {
        let (_, unsafe_, _) = explore(mutant);
        let report = d.safety(24, mutant).unwrap();
        assert_eq!(report.safe(), !unsafe_, "{mutant:?}");
    }
}

#[test]
fn invariant_failures_match_checker() {
    let report = dekker_safety(24, None).unwrap();
    assert_eq!(report.invariant_failures, explore(None).2);
    assert_eq!(report.initial_stores, 8);
}

#[test]
fn verdict_is_stable_up_to_horizon_48() {
    let report = dekker_safety(48, None).unwrap();
    assert!(report.safe());
}

#[test]
fn broken_mutant_has_concrete_trace() {
    let report = dekker_safety(24, Some("nobusy")).unwrap();
    let v = report.safety.direct.expect("violation");
    assert!(v.n <= 24);
    assert!(v.trace.last().unwrap().contains("cs1=tt,cs2=tt"));
    assert!(v.trace.first().unwrap().contains("cs1=ff,cs2=ff"));
}

#[test]
fn decomposition_is_consistent_at_bounded_depth() {
    for mutant in [None, Some("noturn")] {
        let report = dekker_safety(24, mutant).unwrap();
        assert!(report.decomposition.agrees(), "{mutant:?}");
    }
}

#[test]
fn three_disjunct_invariant_is_not_inductive_for_this_busy_wait() {
    let report = dekker_safety(24, None).unwrap();
    assert_eq!(report.safety.invariant_safe(), Some(false));
}

#[test]
fn axioms_hold_over_all_32_stores() {
    let d = Dekker::load().unwrap();
    let results = d.check_axioms().unwrap();
    assert_eq!(results.iter().filter(|r| r.stated).count(), 7);
    assert!(results.iter().all(|r| r.holds));
}
