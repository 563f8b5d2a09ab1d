mod support;

use robonomics_core::codec::Value;
use robonomics_core::contract_engine::{call_contract, deploy_contract, ContractError, ExecLimits};
use robonomics_core::crypto_identity::Address;
use robonomics_core::ledger::{genesis_state, Allocation};
use robonomics_core::par::ExecMode;
use support::fuzz::{self, SCENARIO_KINDS};

#[test]
fn every_kind_pays_exactly_once_and_never_strands_funds() {
    let stats = fuzz::contract_fuzz(1_800, 0xC0FFEE, ExecMode::Parallel).unwrap();
    assert_eq!(stats.sequences, 1_800);
    assert!(stats.successful_calls > stats.sequences, "{stats:?}");
    assert!(stats.terminal_sequences > 100, "{stats:?}");
}

#[test]
fn fuzz_outcome_does_not_depend_on_mode() {
    let a = fuzz::contract_fuzz(120, 9, ExecMode::Sequential).unwrap();
    let b = fuzz::contract_fuzz(120, 9, ExecMode::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn injected_faults_leave_no_trace() {
    let cast = fuzz::Cast::plain(5);
    let allocs: Vec<Allocation> = cast.actors.iter().map(|a| Allocation { address: *a, balance: 10_000 }).collect();
    let mut faults = 0;
    for (i, kind) in SCENARIO_KINDS.iter().cycle().take(300).enumerate() {
        let mut r = fuzz::rng(i as u64);
        let mut world = genesis_state(&allocs);
        let (args, value) = fuzz::random_deploy(&mut r, *kind, &cast, 1);
        let Ok(out) = deploy_contract(&mut world, cast.actors[1], 0, value, kind.as_str(), &args, 1, &ExecLimits::default()) else {
            continue;
        };
        for height in 2..20 {
            let inst = world.contracts[&out.contract].clone();
            let (method, args, value) = fuzz::random_call(&mut r, &inst, &cast, height);
            let caller = cast.actors[height as usize % cast.actors.len()];
            let before = world.state_hash();
            for step in 1..4 {
                let limits = ExecLimits { fault_at_step: Some(step), ..ExecLimits::default() };
                if let Err(ContractError::InjectedFault(_)) =
                    call_contract(&mut world, caller, out.contract, value, &method, &args, height, &limits)
                {
                    faults += 1;
                    assert_eq!(world.state_hash(), before, "{kind}.{method} leaked effects at step {step}");
                }
            }
            let _ = call_contract(&mut world, caller, out.contract, value, &method, &args, height, &ExecLimits::default());
        }
    }
    assert!(faults > 1_000);
}

#[test]
fn step_limit_aborts_without_effects() {
    let a = Address([1; 20]);
    let b = Address([2; 20]);
    let mut world = genesis_state(&[Allocation { address: a, balance: 100 }, Allocation { address: b, balance: 100 }]);
    let limits = ExecLimits::default();
    let game = deploy_contract(&mut world, a, 0, 0, "game_betting", &[Value::from("chess"), Value::U64(5), Value::U64(3)], 1, &limits)
        .unwrap()
        .contract;
    call_contract(&mut world, a, game, 5, "join", &[], 2, &limits).unwrap();
    call_contract(&mut world, b, game, 5, "join", &[], 2, &limits).unwrap();
    let before = world.state_hash();
    let tight = ExecLimits { step_limit: 5, fault_at_step: None };
    let err = call_contract(&mut world, a, game, 0, "move", &[Value::from("e2e4")], 3, &tight).unwrap_err();
    assert!(matches!(err, ContractError::StepLimitExceeded(5)), "{err:?}");
    assert_eq!(world.state_hash(), before);
}

