//! Agreement contracts run by the contract engine.
//!
//! | kind                   | constructor args                                                        |
//! |------------------------|-------------------------------------------------------------------------|
//! | `ride_sharing`         | vehicle, vin (32 bytes), owners, ride_cost, maintenance_fund_rate (%)   |
//! | `maintenance_escrow`   | vehicle, oracle, quote, obligations, timeout_height (deployer = provider)|
//! | `unilateral_reward`    | task, deadline, reward (payable: exactly `reward`)                      |
//! | `arbitrated_escrow`    | buyer, seller, agent, price, window                                     |
//! | `game_betting`         | rules (`tictactoe` / `chess`), stake, move_timeout                      |
//! | `time_lock_commitment` | device, beneficiary, resource, window_start, window_end, period, penalty, duration (payable collateral) |

pub mod chess;
mod commitment;
mod escrow;
mod game;
mod maintenance;
mod reward;
mod ride;
pub mod tictactoe;

pub use commitment::{CommitmentPhase, TimeLockCommitmentState};
pub use escrow::{ArbitratedEscrowState, EscrowPhase};
pub use game::{GameBettingState, GameBoard, GamePhase, GameRules};
pub use maintenance::{service_subject, MaintenanceEscrowState, MaintenancePhase};
pub use reward::{RewardPhase, UnilateralRewardState};
pub use ride::{ballot_passes, split_among_owners, BallotState, PendingTransfer, RideSharingState, GOVERNED_PARAMS};
