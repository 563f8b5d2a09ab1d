use serde::{Serialize, Serializer};

use super::chess::{Color, GameStatus, Position};
use super::tictactoe::{Outcome, TicTacToe};
use crate::codec::Value;
use crate::contract_engine::{Args, CallContext, ContractError, ContractKind, ContractLogic};
use crate::crypto_identity::Address;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GameRules {
    Tictactoe,
    Chess,
}

/// Board state; serializes as FEN for chess and a 9-character grid for tic-tac-toe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameBoard {
    Tictactoe(TicTacToe),
    Chess(Position),
}

impl Serialize for GameBoard {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            GameBoard::Tictactoe(b) => s.serialize_str(&b.to_string()),
            GameBoard::Chess(p) => s.serialize_str(&p.to_fen()),
        }
    }
}

enum MoveResult {
    Ongoing,
    Win(usize),
    Draw,
}

impl GameBoard {
    fn new(rules: GameRules) -> GameBoard {
        match rules {
            GameRules::Tictactoe => GameBoard::Tictactoe(TicTacToe::new()),
            GameRules::Chess => GameBoard::Chess(Position::start()),
        }
    }

    /// Index of the player on turn; player 0 moves first.
    fn to_move(&self) -> usize {
        match self {
            GameBoard::Tictactoe(b) => b.to_move(),
            GameBoard::Chess(p) => usize::from(p.side_to_move() == Color::Black),
        }
    }

    fn play(&mut self, ctx: &mut CallContext<'_>, text: &str) -> Result<MoveResult, ContractError> {
        match self {
            GameBoard::Tictactoe(b) => {
                ctx.charge(9)?;
                *b = b.play(text).map_err(ContractError::IllegalMove)?;
                Ok(match b.outcome() {
                    Outcome::Ongoing => MoveResult::Ongoing,
                    Outcome::Win(p) => MoveResult::Win(p),
                    Outcome::Draw => MoveResult::Draw,
                })
            }
            GameBoard::Chess(p) => {
                let (next, legal) = p.play(text).map_err(ContractError::IllegalMove)?;
                ctx.charge(legal as u64)?;
                *p = next;
                Ok(match p.status() {
                    GameStatus::Ongoing => MoveResult::Ongoing,
                    GameStatus::Checkmate { winner } => MoveResult::Win(usize::from(winner == Color::Black)),
                    GameStatus::Stalemate => MoveResult::Draw,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GamePhase {
    AwaitingPlayers,
    InPlay,
    Settled,
    Drawn,
}

/// Two-player wager settled by the on-chain referee.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameBettingState {
    pub rules: GameRules,
    pub stake: u64,
    pub move_timeout: u64,
    pub players: Vec<Address>,
    /// Total stakes deposited.
    pub pot: u64,
    pub board: GameBoard,
    pub moves: Vec<String>,
    pub last_action: u64,
    pub winner: Option<Address>,
    pub phase: GamePhase,
}

impl GameBettingState {
    fn award(&mut self, ctx: &mut CallContext<'_>, winner: usize, reason: &str) -> Result<(), ContractError> {
        let w = self.players[winner];
        ctx.pay(w, self.pot)?;
        self.winner = Some(w);
        self.phase = GamePhase::Settled;
        ctx.emit("GameSettled", [("winner", Value::Addr(w)), ("amount", Value::U64(self.pot)), ("reason", Value::from(reason))])
    }

    /// Returns each stake; an odd unit goes to the first player.
    fn refund_all(&mut self, ctx: &mut CallContext<'_>, reason: &str) -> Result<(), ContractError> {
        let n = self.players.len() as u64;
        for (i, p) in self.players.clone().into_iter().enumerate() {
            let share = self.pot / n + if i == 0 { self.pot % n } else { 0 };
            ctx.pay(p, share)?;
        }
        self.phase = GamePhase::Drawn;
        ctx.emit("GameDrawn", [("reason", Value::from(reason))])
    }

    fn player_index(&self, who: &Address) -> Result<usize, ContractError> {
        self.players
            .iter()
            .position(|p| p == who)
            .ok_or_else(|| ContractError::unauthorized("caller is not a player"))
    }

    fn expect_in_play(&self) -> Result<(), ContractError> {
        if self.phase == GamePhase::InPlay {
            Ok(())
        } else {
            Err(ContractError::state(format!("game is {:?}", self.phase)))
        }
    }
}

impl ContractLogic for GameBettingState {
    const KIND: ContractKind = ContractKind::GameBetting;
    const METHODS: &'static [(&'static str, bool)] = &[("join", true), ("move", false), ("resign", false), ("settle", false)];
    const PAYABLE_CONSTRUCTOR: bool = false;

    fn construct(ctx: &mut CallContext<'_>, args: Args<'_>) -> Result<Self, ContractError> {
        args.expect_len(3)?;
        let rules = match args.str(0, "rules")? {
            "tictactoe" => GameRules::Tictactoe,
            "chess" => GameRules::Chess,
            other => return Err(ContractError::BadArguments(format!("unknown rules {other:?}"))),
        };
        let stake = args.u64(1, "stake")?;
        let move_timeout = args.u64(2, "move_timeout")?;
        if stake == 0 || move_timeout == 0 {
            return Err(ContractError::BadArguments("stake and move_timeout must be positive".into()));
        }
        Ok(GameBettingState {
            rules,
            stake,
            move_timeout,
            players: Vec::new(),
            pot: 0,
            board: GameBoard::new(rules),
            moves: Vec::new(),
            last_action: ctx.height,
            winner: None,
            phase: GamePhase::AwaitingPlayers,
        })
    }

    fn call(&mut self, ctx: &mut CallContext<'_>, method: &str, args: Args<'_>) -> Result<Option<Value>, ContractError> {
        match method {
            "join" => {
                args.expect_len(0)?;
                if self.phase != GamePhase::AwaitingPlayers {
                    return Err(ContractError::state("game is full"));
                }
                if self.players.contains(&ctx.caller) {
                    return Err(ContractError::state("already joined"));
                }
                if ctx.value != self.stake {
                    return Err(ContractError::WrongStake { expected: self.stake, got: ctx.value });
                }
                self.players.push(ctx.caller);
                self.pot += ctx.value;
                self.last_action = ctx.height;
                if self.players.len() == 2 {
                    self.phase = GamePhase::InPlay;
                }
                ctx.emit("PlayerJoined", [("player", Value::Addr(ctx.caller)), ("seat", Value::U64(self.players.len() as u64 - 1))])?;
            }
            "move" => {
                args.expect_len(1)?;
                let text = args.str(0, "move")?;
                self.expect_in_play()?;
                let me = self.player_index(&ctx.caller)?;
                if me != self.board.to_move() {
                    return Err(ContractError::NotYourTurn);
                }
                let result = self.board.play(ctx, text)?;
                self.moves.push(text.to_string());
                self.last_action = ctx.height;
                ctx.emit("Moved", [("player", Value::Addr(ctx.caller)), ("move", Value::from(text))])?;
                match result {
                    MoveResult::Ongoing => {}
                    MoveResult::Win(p) => self.award(ctx, p, "win")?,
                    MoveResult::Draw => self.refund_all(ctx, "draw")?,
                }
            }
            "resign" => {
                args.expect_len(0)?;
                self.expect_in_play()?;
                let me = self.player_index(&ctx.caller)?;
                self.award(ctx, 1 - me, "resignation")?;
            }
            "settle" => {
                args.expect_len(0)?;
                if ctx.height <= self.last_action + self.move_timeout {
                    return Err(ContractError::state("move timeout not reached"));
                }
                match (self.phase, self.players.len()) {
                    (GamePhase::InPlay, _) => {
                        let stalled = self.board.to_move();
                        self.award(ctx, 1 - stalled, "timeout")?;
                    }
                    (GamePhase::AwaitingPlayers, 1) => self.refund_all(ctx, "no opponent")?,
                    _ => return Err(ContractError::state(format!("nothing to settle in phase {:?}", self.phase))),
                }
            }
            other => return Err(ContractError::MethodNotFound(other.to_string())),
        }
        Ok(None)
    }

    fn phase(&self) -> String {
        format!("{:?}", self.phase)
    }

    fn is_terminal(&self) -> bool {
        matches!(self.phase, GamePhase::Settled | GamePhase::Drawn)
    }
}
