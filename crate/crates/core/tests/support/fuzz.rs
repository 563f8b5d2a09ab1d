//! Randomized drivers shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robonomics_core::codec::Value;
use robonomics_core::contract_engine::{
    call_contract, deploy_contract, ContractInstance, ContractKind, ContractState, ExecLimits,
};
use robonomics_core::contracts::chess::Position;
use robonomics_core::contracts::service_subject;
use robonomics_core::crypto_identity::{generate_keypair, keypair_from_label, Address, KeyPair};
use robonomics_core::ledger::{genesis_state, validate_dump, Allocation, Ledger, LedgerConfig, SignedTransaction, WorldState};
use robonomics_core::oracle::publish_attestation;
use robonomics_core::par::{self, ExecMode};

pub const SCENARIO_KINDS: [ContractKind; 6] = [
    ContractKind::RideSharing,
    ContractKind::MaintenanceEscrow,
    ContractKind::UnilateralReward,
    ContractKind::ArbitratedEscrow,
    ContractKind::GameBetting,
    ContractKind::TimeLockCommitment,
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Participants for contract fuzzing. `actors[0]` is the attestation oracle.
pub struct Cast {
    pub actors: Vec<Address>,
    pub oracle: KeyPair,
    pub forger: KeyPair,
}

impl Cast {
    pub fn with_actors(mut actors: Vec<Address>) -> Cast {
        let oracle = keypair_from_label("fuzz-oracle");
        let forger = keypair_from_label("fuzz-forger");
        actors.insert(0, oracle.address());
        Cast { actors, oracle, forger }
    }

    pub fn plain(n: u8) -> Cast {
        Cast::with_actors((1..=n).map(|i| Address([i; 20])).collect())
    }

    fn pick(&self, r: &mut ChaCha8Rng) -> Address {
        *self.actors.choose(r).unwrap()
    }
}

fn maybe<T>(r: &mut ChaCha8Rng, p: f64, good: T, bad: impl FnOnce(&mut ChaCha8Rng) -> T) -> T {
    if r.gen_bool(p) {
        good
    } else {
        bad(r)
    }
}

/// Constructor arguments and attached value, mostly valid.
pub fn random_deploy(r: &mut ChaCha8Rng, kind: ContractKind, cast: &Cast, height: u64) -> (Vec<Value>, u64) {
    let a = |r: &mut ChaCha8Rng| Value::Addr(cast.pick(r));
    match kind {
        ContractKind::RideSharing => {
            let n = r.gen_range(0..=4);
            let owners: Vec<Value> = (0..n).map(|_| a(r)).collect();
            let vin_len = maybe(r, 0.95, 32, |r| r.gen_range(0..40));
            (
                vec![a(r), Value::Bytes(vec![7; vin_len]), Value::List(owners), Value::U64(r.gen_range(0..20)), Value::U64(r.gen_range(0..=110))],
                0,
            )
        }
        ContractKind::MaintenanceEscrow => {
            let oracle = maybe(r, 0.8, Value::Addr(cast.oracle.address()), |r| a(r));
            (
                vec![a(r), oracle, Value::U64(r.gen_range(0..40)), Value::from("oil"), Value::U64(height + r.gen_range(0..30))],
                0,
            )
        }
        ContractKind::UnilateralReward => {
            let reward = r.gen_range(0..40);
            let value = maybe(r, 0.9, reward, |r| r.gen_range(0..40));
            (vec![Value::from("task"), Value::U64(height + r.gen_range(0..20)), Value::U64(reward)], value)
        }
        ContractKind::ArbitratedEscrow => (
            vec![a(r), a(r), a(r), Value::U64(r.gen_range(0..40)), Value::U64(r.gen_range(0..10))],
            0,
        ),
        ContractKind::GameBetting => {
            let rules = if r.gen_bool(0.5) { "tictactoe" } else { "chess" };
            let rules = maybe(r, 0.97, rules, |_| "go");
            (vec![Value::from(rules), Value::U64(r.gen_range(0..20)), Value::U64(r.gen_range(0..8))], 0)
        }
        ContractKind::TimeLockCommitment => {
            let period = if r.gen_bool(0.5) { 0 } else { r.gen_range(1..24) };
            let (ws, we) = if period == 0 {
                let s = height + r.gen_range(0..20);
                (s, s + r.gen_range(0..10))
            } else {
                (r.gen_range(0..period), r.gen_range(0..period))
            };
            let penalty = r.gen_range(0..15);
            (
                vec![a(r), a(r), Value::from("snacks"), Value::U64(ws), Value::U64(we), Value::U64(period), Value::U64(penalty), Value::U64(r.gen_range(0..40))],
                r.gen_range(0..60),
            )
        }
        ContractKind::Token => (vec![Value::from("TKN")], 0),
    }
}

fn state_json(inst: &ContractInstance) -> serde_json::Value {
    serde_json::from_str(&inst.state_json()).unwrap()
}

fn u64_field(s: &serde_json::Value, k: &str) -> u64 {
    s[k].as_u64().unwrap_or(0)
}

/// A method call against `inst`: (method, args, attached value).
pub fn random_call(r: &mut ChaCha8Rng, inst: &ContractInstance, cast: &Cast, height: u64) -> (String, Vec<Value>, u64) {
    let methods = inst.kind.methods();
    if r.gen_bool(0.02) {
        return ("self_destruct".into(), vec![], 0);
    }
    let (method, payable) = *methods.choose(r).unwrap();
    let s = state_json(inst);
    let a = |r: &mut ChaCha8Rng| Value::Addr(cast.pick(r));
    let args = match (inst.kind, method) {
        (ContractKind::RideSharing, "set_owners") => {
            let n = r.gen_range(0..=4);
            vec![Value::List((0..n).map(|_| a(r)).collect())]
        }
        (ContractKind::RideSharing, "approve_transfer") => vec![a(r)],
        (ContractKind::RideSharing, "propose") => {
            let param = *["service_fee", "maintenance_fund_rate", "colour"].choose(r).unwrap();
            vec![Value::from(param), Value::U64(r.gen_range(0..=110)), Value::U64(height + r.gen_range(0..6))]
        }
        (ContractKind::RideSharing, "vote") => vec![Value::Bool(r.gen())],
        (ContractKind::MaintenanceEscrow, "confirm") => {
            let vehicle = s["vehicle"].as_str().unwrap().parse::<Address>().unwrap();
            let subject = maybe(r, 0.8, service_subject(&vehicle, "oil"), |_| "service-ok:elsewhere".into());
            let signer = if r.gen_bool(0.8) { &cast.oracle } else { &cast.forger };
            let att = publish_attestation(signer, &subject, Value::Bool(r.gen_bool(0.8)), height);
            vec![maybe(r, 0.95, att.to_value(), |_| Value::U64(3))]
        }
        (ContractKind::UnilateralReward, "claim") => vec![Value::from("done")],
        (ContractKind::ArbitratedEscrow, "arbitrate") => {
            vec![Value::from(*["refund", "pay", "split"].choose(r).unwrap())]
        }
        (ContractKind::GameBetting, "move") => vec![Value::from(random_game_move(r, &s))],
        (ContractKind::TimeLockCommitment, "request_access") => {
            vec![Value::U64(height.saturating_sub(r.gen_range(0..4)) + u64::from(r.gen_bool(0.05)))]
        }
        _ => vec![],
    };
    let value = if payable { payable_value(r, inst, &s) } else { maybe(r, 0.97, 0, |r| r.gen_range(1..5)) };
    (method.to_string(), args, value)
}

fn payable_value(r: &mut ChaCha8Rng, inst: &ContractInstance, s: &serde_json::Value) -> u64 {
    let exact = match inst.kind {
        ContractKind::RideSharing => u64_field(s, "ride_cost"),
        ContractKind::MaintenanceEscrow => u64_field(s, "quote"),
        ContractKind::ArbitratedEscrow => u64_field(s, "price"),
        ContractKind::GameBetting => u64_field(s, "stake"),
        _ => 0,
    };
    maybe(r, 0.85, exact, |r| r.gen_range(0..40))
}

fn random_game_move(r: &mut ChaCha8Rng, s: &serde_json::Value) -> String {
    let board = s["board"].as_str().unwrap_or("");
    if board.len() == 9 {
        return r.gen_range(0..10).to_string();
    }
    match Position::from_fen(board) {
        Ok(p) if r.gen_bool(0.9) => {
            let moves = p.legal_moves();
            moves.choose(r).map_or("e2e4".to_string(), |m| m.to_string())
        }
        _ => ["e2e4", "e7e5", "a1a8", "zz"].choose(r).unwrap().to_string(),
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ContractFuzzStats {
    pub sequences: u64,
    pub calls: u64,
    pub successful_calls: u64,
    pub terminal_sequences: u64,
}

impl std::ops::Add for ContractFuzzStats {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ContractFuzzStats {
            sequences: self.sequences + o.sequences,
            calls: self.calls + o.calls,
            successful_calls: self.successful_calls + o.successful_calls,
            terminal_sequences: self.terminal_sequences + o.terminal_sequences,
        }
    }
}

fn is_one_shot(kind: ContractKind) -> bool {
    matches!(
        kind,
        ContractKind::MaintenanceEscrow | ContractKind::UnilateralReward | ContractKind::ArbitratedEscrow | ContractKind::GameBetting
    )
}

fn instance(world: &WorldState, c: &Address) -> ContractInstance {
    world.contracts[c].clone()
}

/// One call sequence against a freshly deployed contract. Checks after every
/// call: failed calls change nothing, funds are conserved, terminal contracts
/// hold nothing and never pay again, one-shot contracts pay out in at most one
/// call, and ride fares are paid out exactly once and in full. Afterwards a
/// brute-force recovery pass (every zero-argument method by every actor, far
/// past all deadlines) must drain the contract.
pub fn contract_sequence(seed: u64, kind: ContractKind) -> Result<ContractFuzzStats, String> {
    let mut r = rng(seed);
    let cast = Cast::plain(5);
    let allocs: Vec<Allocation> = cast.actors.iter().map(|a| Allocation { address: *a, balance: 10_000 }).collect();
    let mut world = genesis_state(&allocs);
    let limits = ExecLimits::default();
    let mut height = 1;
    let mut stats = ContractFuzzStats::default();

    // retry until a constructor accepts; failed deploys must leave no trace
    let contract = loop {
        let deployer = cast.pick(&mut r);
        let (args, value) = random_deploy(&mut r, kind, &cast, height);
        let before = world.state_hash();
        match deploy_contract(&mut world, deployer, r.gen(), value, kind.as_str(), &args, height, &limits) {
            Ok(o) => break o.contract,
            Err(_) if world.state_hash() == before => continue,
            Err(e) => return Err(format!("seed {seed}: failed deploy mutated state ({e})")),
        }
    };
    let supply = world.total_funds();
    let mut deposits = instance(&world, &contract).held_funds;
    let mut payouts = 0u64;
    let mut payout_calls = 0u64;
    let mut open_fare: Option<u64> = None;

    let ops = r.gen_range(5..40);
    for _ in 0..ops {
        height += r.gen_range(0..4);
        let inst = instance(&world, &contract);
        let (method, args, value) = random_call(&mut r, &inst, &cast, height);
        let caller = if inst.kind == ContractKind::RideSharing && method == "complete_ride" && r.gen_bool(0.7) {
            let s = state_json(&inst);
            s["vehicle"].as_str().unwrap().parse().unwrap()
        } else {
            cast.pick(&mut r)
        };
        let before_hash = world.state_hash();
        stats.calls += 1;
        let result = call_contract(&mut world, caller, contract, value, &method, &args, height, &limits);
        let after = instance(&world, &contract);
        if world.total_funds() != supply {
            return Err(format!("seed {seed}: {method} broke conservation"));
        }
        let Ok(_) = result else {
            if world.state_hash() != before_hash {
                return Err(format!("seed {seed}: failed {method} mutated state"));
            }
            continue;
        };
        stats.successful_calls += 1;
        let payout = inst.held_funds + value - after.held_funds;
        deposits += value;
        payouts += payout;
        if inst.state.is_terminal() && (payout > 0 || value > 0) {
            return Err(format!("seed {seed}: {kind} moved funds after reaching {}", inst.phase()));
        }
        if payout > 0 {
            payout_calls += 1;
            if is_one_shot(kind) && payout_calls > 1 {
                return Err(format!("seed {seed}: {kind} paid out twice ({method})"));
            }
        }
        match (kind, method.as_str()) {
            (ContractKind::RideSharing, "request_ride") => open_fare = Some(value),
            (ContractKind::RideSharing, "complete_ride") => {
                if open_fare.take() != Some(payout) {
                    return Err(format!("seed {seed}: ride paid {payout}, not the deposited fare"));
                }
            }
            (ContractKind::TimeLockCommitment, "request_access") => {
                let penalty = u64_field(&state_json(&inst), "penalty");
                if payout > penalty {
                    return Err(format!("seed {seed}: forfeited {payout} > penalty {penalty}"));
                }
            }
            _ => {}
        }
        if after.state.is_terminal() && after.held_funds != 0 {
            return Err(format!("seed {seed}: {kind} stuck with {} in terminal {}", after.held_funds, after.phase()));
        }
        if after.held_funds != deposits - payouts {
            return Err(format!("seed {seed}: held funds drifted from deposits minus payouts"));
        }
    }
    if instance(&world, &contract).state.is_terminal() {
        stats.terminal_sequences += 1;
    }

    // recovery: every zero-argument method by every actor, each round far
    // past any deadline the previous round may have set
    for _ in 0..3 {
        height += 100_000;
        for caller in &cast.actors {
            for (method, _) in kind.methods() {
                let _ = call_contract(&mut world, *caller, contract, 0, method, &[], height, &limits);
            }
        }
    }
    let end = instance(&world, &contract);
    if end.held_funds != 0 {
        return Err(format!("seed {seed}: {kind} keeps {} in phase {} with no recovery path", end.held_funds, end.phase()));
    }
    if world.total_funds() != supply {
        return Err(format!("seed {seed}: recovery broke conservation"));
    }
    stats.sequences = 1;
    Ok(stats)
}

/// `n` sequences spread evenly over the six scenario kinds.
pub fn contract_fuzz(n: u64, base_seed: u64, mode: ExecMode) -> Result<ContractFuzzStats, String> {
    par::map_range(mode, n, |i| contract_sequence(base_seed.wrapping_add(i), SCENARIO_KINDS[(i % 6) as usize]))
        .into_iter()
        .try_fold(ContractFuzzStats::default(), |acc, s| s.map(|s| acc + s))
}

pub fn fuzz_keys(n: u8) -> Vec<KeyPair> {
    (0..n).map(|i| generate_keypair(&[i.wrapping_add(101); 32]).unwrap()).collect()
}

#[derive(Debug, Default, Clone, Copy)]
pub struct LedgerFuzzStats {
    pub ops: u64,
    pub blocks: u64,
    pub committed: u64,
}

/// Randomized transfers, deploys and calls through the full ledger. Checks
/// total funds against genesis plus minted rewards after every block and
/// validates the finished chain.
pub fn ledger_fuzz_run(seed: u64, min_ops: u64, mode: ExecMode) -> Result<LedgerFuzzStats, String> {
    let mut r = rng(seed);
    let keys = fuzz_keys(6);
    let cast = Cast::with_actors(keys.iter().map(KeyPair::address).collect());
    let mut config = LedgerConfig { mode, ..LedgerConfig::default() };
    for k in &keys {
        config = config.allocate(k.address(), r.gen_range(0..500));
    }
    let genesis_supply = config.genesis_supply();
    let mut ledger = Ledger::new(config);
    let mut nonces: BTreeMap<Address, u64> = BTreeMap::new();
    let mut stats = LedgerFuzzStats::default();

    let check = |ledger: &Ledger| -> Result<(), String> {
        let expected = genesis_supply + 50 * ledger.height() as u128;
        let actual = ledger.state().total_funds();
        if actual != expected {
            return Err(format!("seed {seed}: height {} holds {actual}, expected {expected}", ledger.height()));
        }
        Ok(())
    };
    check(&ledger)?;
    while stats.ops < min_ops || ledger.pending_len() > 0 {
        stats.ops += 1;
        if r.gen_bool(0.12) || stats.ops >= min_ops {
            let miner = *cast.actors.choose(&mut r).unwrap();
            let difficulty = if r.gen_bool(0.1) { 4 } else { 0 };
            let block = ledger.produce_block(miner, difficulty).map_err(|e| e.to_string())?;
            stats.committed += block.transactions.len() as u64;
            stats.blocks += 1;
            nonces.clear();
            check(&ledger)?;
            continue;
        }
        let k = keys.choose(&mut r).unwrap();
        let from = k.address();
        let nonce = ledger.get_nonce(&from) + nonces.get(&from).copied().unwrap_or(0);
        let height = ledger.height() + 1;
        let contracts: Vec<Address> = ledger.state().contracts.keys().copied().collect();
        let roll = r.gen_range(0..10);
        let tx = if roll < 4 || (roll >= 7 && contracts.is_empty()) {
            let to = *cast.actors.choose(&mut r).unwrap();
            SignedTransaction::transfer(k, to, nonce, r.gen_range(0..120))
        } else if roll < 7 {
            let kind = *SCENARIO_KINDS.choose(&mut r).unwrap();
            let (args, value) = random_deploy(&mut r, kind, &cast, height);
            SignedTransaction::deploy(k, nonce, value, kind.as_str(), args)
        } else {
            let c = *contracts.choose(&mut r).unwrap();
            let inst = ledger.state().contracts[&c].clone();
            let (method, args, value) = random_call(&mut r, &inst, &cast, height);
            SignedTransaction::call(k, c, nonce, value, &method, args)
        };
        if ledger.submit_transaction(tx).is_ok() {
            *nonces.entry(from).or_default() += 1;
        }
    }
    let report = validate_dump(&ledger.chain().to_dump(), &ExecLimits::default(), mode);
    if !report.valid {
        return Err(format!("seed {seed}: own chain rejected: {:?}", report.violation));
    }
    Ok(stats)
}

/// Result of mutating one byte of a dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TamperOutcome {
    /// Rejected at the line that was edited.
    Located,
    /// Rejected, but the violation names another height.
    Misplaced { at: u64, expected: u64 },
    Accepted,
}

pub fn tamper_once(dump: &str, r: &mut ChaCha8Rng, mode: ExecMode) -> TamperOutcome {
    let mut bytes = dump.as_bytes().to_vec();
    let pos = r.gen_range(0..bytes.len());
    let old = bytes[pos];
    let mut new = r.gen::<u8>();
    while new == old {
        new = r.gen();
    }
    bytes[pos] = new;
    let line = dump.as_bytes()[..pos].iter().filter(|b| **b == b'\n').count() as u64;
    let text = String::from_utf8_lossy(&bytes);
    let report = validate_dump(&text, &ExecLimits::default(), mode);
    match report.violation {
        None => TamperOutcome::Accepted,
        Some(v) if v.height == line => TamperOutcome::Located,
        Some(v) => TamperOutcome::Misplaced { at: v.height, expected: line },
    }
}

/// Submits fresh, duplicated and conflicting transactions from several
/// threads and returns the committed `(from, nonce)` pairs seen more than once,
/// plus senders whose committed nonces are not exactly `0..k`.
pub fn duplicate_submission_fuzz(seed: u64, rounds: u64) -> (Vec<(Address, u64)>, Vec<Address>, u64) {
    let mut r = rng(seed);
    let keys = fuzz_keys(4);
    let mut config = LedgerConfig { mode: ExecMode::Sequential, ..LedgerConfig::default() };
    for k in &keys {
        config = config.allocate(k.address(), 1_000_000);
    }
    let mut ledger = Ledger::new(config);
    let mut history: Vec<SignedTransaction> = Vec::new();
    for _ in 0..rounds {
        let mut batch = Vec::new();
        for k in &keys {
            let nonce = ledger.get_nonce(&k.address());
            for j in 0..r.gen_range(1..4u64) {
                let to = keys.choose(&mut r).unwrap().address();
                batch.push(SignedTransaction::transfer(k, to, nonce + j, r.gen_range(1..50)));
                // same nonce, different payload
                batch.push(SignedTransaction::transfer(k, to, nonce + j, r.gen_range(50..100)));
            }
        }
        for _ in 0..r.gen_range(0..8) {
            if let Some(old) = history.choose(&mut r) {
                batch.push(old.clone());
            }
        }
        let dup: Vec<SignedTransaction> = batch.choose_multiple(&mut r, batch.len() / 2).cloned().collect();
        batch.extend(dup);
        batch.shuffle(&mut r);
        let chunks: Vec<Vec<SignedTransaction>> = batch.chunks(batch.len().div_ceil(4)).map(<[_]>::to_vec).collect();
        std::thread::scope(|s| {
            for chunk in &chunks {
                let ledger = &ledger;
                s.spawn(move || {
                    for tx in chunk {
                        let _ = ledger.submit_transaction(tx.clone());
                    }
                });
            }
        });
        history.extend(batch);
        ledger.produce_block(keys[0].address(), 0).unwrap();
    }
    let mut seen = BTreeSet::new();
    let mut collisions = Vec::new();
    let mut per_sender: BTreeMap<Address, Vec<u64>> = BTreeMap::new();
    let mut committed = 0;
    for b in ledger.blocks() {
        for tx in &b.transactions {
            committed += 1;
            if !seen.insert((tx.from, tx.nonce)) {
                collisions.push((tx.from, tx.nonce));
            }
            per_sender.entry(tx.from).or_default().push(tx.nonce);
        }
    }
    let gaps = per_sender
        .into_iter()
        .filter(|(_, ns)| ns.iter().enumerate().any(|(i, n)| *n != i as u64))
        .map(|(a, _)| a)
        .collect();
    (collisions, gaps, committed)
}

/// One entry per owner: `Some(yes)` or abstain.
pub type Ballot = Vec<Option<bool>>;

/// Deploys a ride contract with `n` owners, casts `votes` (`Some(yes)` or
/// abstain), executes after the deadline and returns whether it passed.
pub fn run_ballot(votes: &[Option<bool>]) -> bool {
    let n = votes.len();
    let owners: Vec<Address> = (0..n as u8).map(|i| Address([i + 1; 20])).collect();
    let vehicle = Address([200; 20]);
    let mut world = genesis_state(&owners.iter().map(|a| Allocation { address: *a, balance: 0 }).collect::<Vec<_>>());
    let limits = ExecLimits::default();
    let args = vec![
        Value::Addr(vehicle),
        Value::Bytes(vec![0; 32]),
        Value::List(owners.iter().map(|o| Value::Addr(*o)).collect()),
        Value::U64(10),
        Value::U64(0),
    ];
    let c = deploy_contract(&mut world, owners[0], 0, 0, "ride_sharing", &args, 1, &limits).unwrap().contract;
    let call = |w: &mut WorldState, who: Address, m: &str, a: Vec<Value>, h: u64| call_contract(w, who, c, 0, m, &a, h, &limits);
    call(&mut world, owners[0], "propose", vec![Value::from("service_fee"), Value::U64(11), Value::U64(5)], 2).unwrap();
    for (o, v) in owners.iter().zip(votes) {
        if let Some(yes) = v {
            call(&mut world, *o, "vote", vec![Value::Bool(*yes)], 3).unwrap();
        }
    }
    let out = call(&mut world, owners[0], "execute", vec![], 6).unwrap();
    let passed = out.output == Some(Value::Bool(true));
    let cost = match &world.contracts[&c].state {
        ContractState::RideSharing(s) => s.ride_cost,
        _ => unreachable!(),
    };
    assert_eq!(cost == 11, passed, "parameter applied iff the ballot passed");
    passed
}

/// Every yes/no/abstain assignment for `n` owners.
pub fn all_ballots(n: usize) -> impl Iterator<Item = Ballot> {
    (0..3u32.pow(n as u32)).map(move |mut code| {
        (0..n)
            .map(|_| {
                let v = match code % 3 {
                    0 => None,
                    1 => Some(true),
                    _ => Some(false),
                };
                code /= 3;
                v
            })
            .collect()
    })
}

/// Mismatches between the contract and `yes > n / 2` over all assignments.
pub fn governance_mismatches(max_owners: usize) -> (u64, Vec<(Ballot, bool)>) {
    let mut checked = 0;
    let mut bad = Vec::new();
    for n in 1..=max_owners {
        for votes in all_ballots(n) {
            checked += 1;
            let yes = votes.iter().filter(|v| **v == Some(true)).count();
            let truth = 2 * yes > n;
            let got = run_ballot(&votes);
            if got != truth {
                bad.push((votes, got));
            }
        }
    }
    (checked, bad)
}
