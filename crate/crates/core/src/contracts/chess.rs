//! Chess move validation on a 0x88 board.
//!
//! Full movement rules including castling, en passant and promotion, with
//! checkmate and stalemate detection. Repetition and fifty-move draws are not
//! adjudicated.

use std::fmt;

use crate::par::{self, ExecMode};

pub const START_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub fn opponent(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }

    fn forward(self) -> i8 {
        match self {
            Color::White => 16,
            Color::Black => -16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PieceKind {
    Pawn,
    Knight,
    Bishop,
    Rook,
    Queen,
    King,
}

impl PieceKind {
    fn letter(self) -> char {
        match self {
            PieceKind::Pawn => 'p',
            PieceKind::Knight => 'n',
            PieceKind::Bishop => 'b',
            PieceKind::Rook => 'r',
            PieceKind::Queen => 'q',
            PieceKind::King => 'k',
        }
    }

    fn from_letter(c: char) -> Option<PieceKind> {
        Some(match c.to_ascii_lowercase() {
            'p' => PieceKind::Pawn,
            'n' => PieceKind::Knight,
            'b' => PieceKind::Bishop,
            'r' => PieceKind::Rook,
            'q' => PieceKind::Queen,
            'k' => PieceKind::King,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Piece {
    pub color: Color,
    pub kind: PieceKind,
}

impl Piece {
    fn fen_char(self) -> char {
        let c = self.kind.letter();
        match self.color {
            Color::White => c.to_ascii_uppercase(),
            Color::Black => c,
        }
    }
}

/// 0x88 square index: `rank * 16 + file`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square(u8);

impl Square {
    pub fn new(file: u8, rank: u8) -> Square {
        debug_assert!(file < 8 && rank < 8);
        Square(rank * 16 + file)
    }

    pub fn file(self) -> u8 {
        self.0 & 7
    }

    pub fn rank(self) -> u8 {
        self.0 >> 4
    }

    fn offset(self, d: i8) -> Option<Square> {
        let s = self.0 as i16 + d as i16;
        if (0..128).contains(&s) && s & 0x88 == 0 {
            Some(Square(s as u8))
        } else {
            None
        }
    }

    pub fn parse(s: &str) -> Option<Square> {
        let b = s.as_bytes();
        if b.len() != 2 || !(b'a'..=b'h').contains(&b[0]) || !(b'1'..=b'8').contains(&b[1]) {
            return None;
        }
        Some(Square::new(b[0] - b'a', b[1] - b'1'))
    }

    fn all() -> impl Iterator<Item = Square> {
        (0u8..128).filter(|i| i & 0x88 == 0).map(Square)
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", (b'a' + self.file()) as char, self.rank() + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    pub promotion: Option<PieceKind>,
}

impl Move {
    /// Parses coordinate notation: `e2e4`, `e7e8q`.
    pub fn parse(text: &str) -> Option<Move> {
        if !text.is_ascii() || !(4..=5).contains(&text.len()) {
            return None;
        }
        let from = Square::parse(&text[0..2])?;
        let to = Square::parse(&text[2..4])?;
        let promotion = match text[4..].chars().next() {
            None => None,
            Some(c @ ('q' | 'r' | 'b' | 'n')) => PieceKind::from_letter(c),
            Some(_) => return None,
        };
        Some(Move { from, to, promotion })
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.from, self.to)?;
        if let Some(p) = self.promotion {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

const KNIGHT: [i8; 8] = [33, 31, 18, 14, -14, -18, -31, -33];
const KING: [i8; 8] = [17, 16, 15, 1, -1, -15, -16, -17];
const ORTHO: [i8; 4] = [16, 1, -1, -16];
const DIAG: [i8; 4] = [17, 15, -15, -17];

const WHITE_KINGSIDE: u8 = 1;
const WHITE_QUEENSIDE: u8 = 2;
const BLACK_KINGSIDE: u8 = 4;
const BLACK_QUEENSIDE: u8 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameStatus {
    Ongoing,
    Checkmate { winner: Color },
    Stalemate,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FenError {
    #[error("malformed FEN: {0}")]
    Malformed(&'static str),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Position {
    board: [Option<Piece>; 128],
    side: Color,
    castling: u8,
    ep: Option<Square>,
    halfmove: u32,
    fullmove: u32,
}

impl Default for Position {
    fn default() -> Self {
        Position::from_fen(START_FEN).expect("start position parses")
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Position({})", self.to_fen())
    }
}

impl Position {
    pub fn start() -> Position {
        Position::default()
    }

    pub fn side_to_move(&self) -> Color {
        self.side
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.board[sq.0 as usize]
    }

    pub fn from_fen(fen: &str) -> Result<Position, FenError> {
        let mut parts = fen.split_whitespace();
        let placement = parts.next().ok_or(FenError::Malformed("missing placement"))?;
        let mut board = [None; 128];
        let rows: Vec<&str> = placement.split('/').collect();
        if rows.len() != 8 {
            return Err(FenError::Malformed("need 8 ranks"));
        }
        for (i, row) in rows.iter().enumerate() {
            let rank = 7 - i as u8;
            let mut file = 0u8;
            for c in row.chars() {
                if let Some(d) = c.to_digit(10) {
                    file += d as u8;
                } else {
                    let kind = PieceKind::from_letter(c).ok_or(FenError::Malformed("bad piece letter"))?;
                    if file >= 8 {
                        return Err(FenError::Malformed("rank overflow"));
                    }
                    let color = if c.is_ascii_uppercase() { Color::White } else { Color::Black };
                    board[Square::new(file, rank).0 as usize] = Some(Piece { color, kind });
                    file += 1;
                }
            }
            if file != 8 {
                return Err(FenError::Malformed("rank width"));
            }
        }
        let side = match parts.next() {
            Some("w") => Color::White,
            Some("b") => Color::Black,
            _ => return Err(FenError::Malformed("side to move")),
        };
        let mut castling = 0;
        for c in parts.next().ok_or(FenError::Malformed("castling"))?.chars() {
            castling |= match c {
                'K' => WHITE_KINGSIDE,
                'Q' => WHITE_QUEENSIDE,
                'k' => BLACK_KINGSIDE,
                'q' => BLACK_QUEENSIDE,
                '-' => 0,
                _ => return Err(FenError::Malformed("castling")),
            };
        }
        let ep = match parts.next().ok_or(FenError::Malformed("en passant"))? {
            "-" => None,
            s => Some(Square::parse(s).ok_or(FenError::Malformed("en passant"))?),
        };
        let halfmove = parts.next().map_or(Ok(0), |s| s.parse()).map_err(|_| FenError::Malformed("halfmove"))?;
        let fullmove = parts.next().map_or(Ok(1), |s| s.parse()).map_err(|_| FenError::Malformed("fullmove"))?;
        Ok(Position { board, side, castling, ep, halfmove, fullmove })
    }

    pub fn to_fen(&self) -> String {
        let mut out = String::new();
        for rank in (0..8).rev() {
            let mut empty = 0;
            for file in 0..8 {
                match self.piece_at(Square::new(file, rank)) {
                    None => empty += 1,
                    Some(p) => {
                        if empty > 0 {
                            out.push_str(&empty.to_string());
                            empty = 0;
                        }
                        out.push(p.fen_char());
                    }
                }
            }
            if empty > 0 {
                out.push_str(&empty.to_string());
            }
            if rank > 0 {
                out.push('/');
            }
        }
        out.push(' ');
        out.push(if self.side == Color::White { 'w' } else { 'b' });
        out.push(' ');
        if self.castling == 0 {
            out.push('-');
        } else {
            for (bit, c) in [(WHITE_KINGSIDE, 'K'), (WHITE_QUEENSIDE, 'Q'), (BLACK_KINGSIDE, 'k'), (BLACK_QUEENSIDE, 'q')] {
                if self.castling & bit != 0 {
                    out.push(c);
                }
            }
        }
        match self.ep {
            Some(sq) => out.push_str(&format!(" {sq}")),
            None => out.push_str(" -"),
        }
        out.push_str(&format!(" {} {}", self.halfmove, self.fullmove));
        out
    }

    fn king_square(&self, color: Color) -> Option<Square> {
        Square::all().find(|&s| self.piece_at(s) == Some(Piece { color, kind: PieceKind::King }))
    }

    /// Whether `by` attacks `sq`.
    pub fn is_attacked(&self, sq: Square, by: Color) -> bool {
        let has = |s: Option<Square>, kinds: &[PieceKind]| {
            s.and_then(|s| self.piece_at(s))
                .is_some_and(|p| p.color == by && kinds.contains(&p.kind))
        };
        // pawns of `by` sit one step behind the target, from their point of view
        let back = -by.forward();
        if has(sq.offset(back + 1), &[PieceKind::Pawn]) || has(sq.offset(back - 1), &[PieceKind::Pawn]) {
            return true;
        }
        if KNIGHT.iter().any(|&d| has(sq.offset(d), &[PieceKind::Knight])) {
            return true;
        }
        if KING.iter().any(|&d| has(sq.offset(d), &[PieceKind::King])) {
            return true;
        }
        let slide = |dirs: &[i8], kinds: &[PieceKind]| {
            dirs.iter().any(|&d| {
                let mut cur = sq.offset(d);
                while let Some(s) = cur {
                    if let Some(p) = self.piece_at(s) {
                        return p.color == by && kinds.contains(&p.kind);
                    }
                    cur = s.offset(d);
                }
                false
            })
        };
        slide(&ORTHO, &[PieceKind::Rook, PieceKind::Queen]) || slide(&DIAG, &[PieceKind::Bishop, PieceKind::Queen])
    }

    pub fn in_check(&self, color: Color) -> bool {
        self.king_square(color).is_some_and(|k| self.is_attacked(k, color.opponent()))
    }

    fn push_pawn_moves(&self, from: Square, out: &mut Vec<Move>) {
        let us = self.side;
        let fwd = us.forward();
        let last_rank = if us == Color::White { 7 } else { 0 };
        let start_rank = if us == Color::White { 1 } else { 6 };
        let add = |to: Square, out: &mut Vec<Move>| {
            if to.rank() == last_rank {
                for p in [PieceKind::Queen, PieceKind::Rook, PieceKind::Bishop, PieceKind::Knight] {
                    out.push(Move { from, to, promotion: Some(p) });
                }
            } else {
                out.push(Move { from, to, promotion: None });
            }
        };
        if let Some(one) = from.offset(fwd) {
            if self.piece_at(one).is_none() {
                add(one, out);
                if from.rank() == start_rank {
                    if let Some(two) = one.offset(fwd) {
                        if self.piece_at(two).is_none() {
                            out.push(Move { from, to: two, promotion: None });
                        }
                    }
                }
            }
        }
        for side in [1, -1] {
            if let Some(to) = from.offset(fwd + side) {
                match self.piece_at(to) {
                    Some(p) if p.color != us => add(to, out),
                    None if self.ep == Some(to) => out.push(Move { from, to, promotion: None }),
                    _ => {}
                }
            }
        }
    }

    fn push_castles(&self, from: Square, out: &mut Vec<Move>) {
        let us = self.side;
        let (rank, ks, qs) = match us {
            Color::White => (0, WHITE_KINGSIDE, WHITE_QUEENSIDE),
            Color::Black => (7, BLACK_KINGSIDE, BLACK_QUEENSIDE),
        };
        if from != Square::new(4, rank) || self.castling & (ks | qs) == 0 || self.is_attacked(from, us.opponent()) {
            return;
        }
        let rook = Some(Piece { color: us, kind: PieceKind::Rook });
        let empty = |files: &[u8]| files.iter().all(|&f| self.piece_at(Square::new(f, rank)).is_none());
        if self.castling & ks != 0
            && self.piece_at(Square::new(7, rank)) == rook
            && empty(&[5, 6])
            && !self.is_attacked(Square::new(5, rank), us.opponent())
        {
            out.push(Move { from, to: Square::new(6, rank), promotion: None });
        }
        if self.castling & qs != 0
            && self.piece_at(Square::new(0, rank)) == rook
            && empty(&[1, 2, 3])
            && !self.is_attacked(Square::new(3, rank), us.opponent())
        {
            out.push(Move { from, to: Square::new(2, rank), promotion: None });
        }
    }

    /// Moves obeying piece movement rules, ignoring whether the mover's king
    /// is left in check.
    pub fn pseudo_legal_moves(&self) -> Vec<Move> {
        let mut out = Vec::with_capacity(48);
        let us = self.side;
        for from in Square::all() {
            let Some(piece) = self.piece_at(from) else { continue };
            if piece.color != us {
                continue;
            }
            let step = |dirs: &[i8], out: &mut Vec<Move>| {
                for &d in dirs {
                    if let Some(to) = from.offset(d) {
                        if self.piece_at(to).is_none_or(|p| p.color != us) {
                            out.push(Move { from, to, promotion: None });
                        }
                    }
                }
            };
            let slide = |dirs: &[i8], out: &mut Vec<Move>| {
                for &d in dirs {
                    let mut cur = from.offset(d);
                    while let Some(to) = cur {
                        match self.piece_at(to) {
                            None => out.push(Move { from, to, promotion: None }),
                            Some(p) => {
                                if p.color != us {
                                    out.push(Move { from, to, promotion: None });
                                }
                                break;
                            }
                        }
                        cur = to.offset(d);
                    }
                }
            };
            match piece.kind {
                PieceKind::Pawn => self.push_pawn_moves(from, &mut out),
                PieceKind::Knight => step(&KNIGHT, &mut out),
                PieceKind::King => {
                    step(&KING, &mut out);
                    self.push_castles(from, &mut out);
                }
                PieceKind::Bishop => slide(&DIAG, &mut out),
                PieceKind::Rook => slide(&ORTHO, &mut out),
                PieceKind::Queen => {
                    slide(&DIAG, &mut out);
                    slide(&ORTHO, &mut out);
                }
            }
        }
        out
    }

    /// Applies a move without checking it. Callers pass moves from
    /// [`Position::pseudo_legal_moves`] or [`Position::legal_moves`].
    pub fn make_move(&self, mv: Move) -> Position {
        let mut next = self.clone();
        let piece = self.piece_at(mv.from).expect("move from an occupied square");
        let captured = self.piece_at(mv.to);
        next.board[mv.from.0 as usize] = None;

        if piece.kind == PieceKind::Pawn && Some(mv.to) == self.ep && captured.is_none() {
            let victim = mv.to.offset(-piece.color.forward()).expect("en passant victim on board");
            next.board[victim.0 as usize] = None;
        }
        if piece.kind == PieceKind::King && (mv.to.file() as i8 - mv.from.file() as i8).abs() == 2 {
            let rank = mv.from.rank();
            let (rook_from, rook_to) = if mv.to.file() == 6 { (7, 5) } else { (0, 3) };
            let rook = next.board[Square::new(rook_from, rank).0 as usize].take();
            next.board[Square::new(rook_to, rank).0 as usize] = rook;
        }
        let placed = match mv.promotion {
            Some(kind) => Piece { color: piece.color, kind },
            None => piece,
        };
        next.board[mv.to.0 as usize] = Some(placed);

        next.ep = None;
        if piece.kind == PieceKind::Pawn && (mv.to.0 as i16 - mv.from.0 as i16).abs() == 32 {
            next.ep = mv.from.offset(piece.color.forward());
        }
        for sq in [mv.from, mv.to] {
            next.castling &= !match (sq.file(), sq.rank()) {
                (4, 0) => WHITE_KINGSIDE | WHITE_QUEENSIDE,
                (7, 0) => WHITE_KINGSIDE,
                (0, 0) => WHITE_QUEENSIDE,
                (4, 7) => BLACK_KINGSIDE | BLACK_QUEENSIDE,
                (7, 7) => BLACK_KINGSIDE,
                (0, 7) => BLACK_QUEENSIDE,
                _ => 0,
            };
        }
        next.halfmove = if piece.kind == PieceKind::Pawn || captured.is_some() { 0 } else { self.halfmove + 1 };
        if self.side == Color::Black {
            next.fullmove += 1;
        }
        next.side = self.side.opponent();
        next
    }

    pub fn legal_moves(&self) -> Vec<Move> {
        let us = self.side;
        self.pseudo_legal_moves()
            .into_iter()
            .filter(|&mv| !self.make_move(mv).in_check(us))
            .collect()
    }

    pub fn status(&self) -> GameStatus {
        if !self.legal_moves().is_empty() {
            GameStatus::Ongoing
        } else if self.in_check(self.side) {
            GameStatus::Checkmate { winner: self.side.opponent() }
        } else {
            GameStatus::Stalemate
        }
    }

    /// Validates `text` against the legal move list and plays it.
    pub fn play(&self, text: &str) -> Result<(Position, usize), String> {
        let mv = Move::parse(text).ok_or_else(|| format!("malformed move {text:?}"))?;
        let piece = self.piece_at(mv.from).ok_or_else(|| format!("no piece on {}", mv.from))?;
        if piece.color != self.side {
            return Err(format!("piece on {} belongs to the opponent", mv.from));
        }
        let legal = self.legal_moves();
        if legal.contains(&mv) {
            Ok((self.make_move(mv), legal.len()))
        } else if piece.kind == PieceKind::Pawn
            && mv.promotion.is_none()
            && legal.iter().any(|m| m.from == mv.from && m.to == mv.to)
        {
            Err(format!("{text} needs a promotion piece"))
        } else {
            Err(format!("{text} is not a legal move"))
        }
    }
}

pub fn perft(pos: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = pos.legal_moves();
    if depth == 1 {
        return moves.len() as u64;
    }
    moves.into_iter().map(|mv| perft(&pos.make_move(mv), depth - 1)).sum()
}

/// Perft with the root moves split across threads under `mode`.
pub fn perft_with(pos: &Position, depth: u32, mode: ExecMode) -> u64 {
    if depth <= 1 {
        return perft(pos, depth);
    }
    let moves = pos.legal_moves();
    par::sum_u64(mode, &moves, |&mv| perft(&pos.make_move(mv), depth - 1))
}
