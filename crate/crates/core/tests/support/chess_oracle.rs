//! Brute-force legal-move enumerator used only as a test oracle.
//!
//! Every (from, to, promotion) triple on the 8x8 grid is checked against the
//! geometric movement rules, applied to a copy of the board, and kept when the
//! mover's king is not attacked afterwards. Slow and simple on purpose; it
//! shares no code with the production move generator.

#![allow(dead_code)]

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OracleBoard {
    /// `cells[rank][file]`, rank 0 is the first rank. `b'.'` marks an empty cell.
    cells: [[u8; 8]; 8],
    white_to_move: bool,
    /// K, Q, k, q
    castle: [bool; 4],
    ep: Option<(i32, i32)>,
}

pub type OracleMove = ((i32, i32), (i32, i32), Option<u8>);

pub const START_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

fn is_white(p: u8) -> bool {
    p.is_ascii_uppercase()
}

impl OracleBoard {
    pub fn from_fen(fen: &str) -> Self {
        let parts: Vec<&str> = fen.split_whitespace().collect();
        let mut cells = [[b'.'; 8]; 8];
        for (i, row) in parts[0].split('/').enumerate() {
            let rank = 7 - i;
            let mut file = 0usize;
            for c in row.bytes() {
                if c.is_ascii_digit() {
                    file += (c - b'0') as usize;
                } else {
                    cells[rank][file] = c;
                    file += 1;
                }
            }
        }
        let white_to_move = parts[1] == "w";
        let mut castle = [false; 4];
        for c in parts[2].bytes() {
            match c {
                b'K' => castle[0] = true,
                b'Q' => castle[1] = true,
                b'k' => castle[2] = true,
                b'q' => castle[3] = true,
                _ => {}
            }
        }
        let ep = if parts[3] == "-" {
            None
        } else {
            let b = parts[3].as_bytes();
            Some(((b[0] - b'a') as i32, (b[1] - b'1') as i32))
        };
        OracleBoard { cells, white_to_move, castle, ep }
    }

    fn at(&self, f: i32, r: i32) -> u8 {
        self.cells[r as usize][f as usize]
    }

    fn clear_between(&self, from: (i32, i32), to: (i32, i32)) -> bool {
        let sx = (to.0 - from.0).signum();
        let sy = (to.1 - from.1).signum();
        let (mut x, mut y) = (from.0 + sx, from.1 + sy);
        while (x, y) != to {
            if self.at(x, y) != b'.' {
                return false;
            }
            x += sx;
            y += sy;
        }
        true
    }

    /// Whether the piece on `from` attacks `to` (ignores what stands on `to`).
    fn attacks(&self, from: (i32, i32), to: (i32, i32)) -> bool {
        let p = self.at(from.0, from.1);
        let dx = to.0 - from.0;
        let dy = to.1 - from.1;
        if dx == 0 && dy == 0 {
            return false;
        }
        match p.to_ascii_lowercase() {
            b'p' => {
                let dir = if is_white(p) { 1 } else { -1 };
                dy == dir && dx.abs() == 1
            }
            b'n' => (dx.abs() == 1 && dy.abs() == 2) || (dx.abs() == 2 && dy.abs() == 1),
            b'k' => dx.abs() <= 1 && dy.abs() <= 1,
            b'r' => (dx == 0 || dy == 0) && self.clear_between(from, to),
            b'b' => dx.abs() == dy.abs() && self.clear_between(from, to),
            b'q' => (dx == 0 || dy == 0 || dx.abs() == dy.abs()) && self.clear_between(from, to),
            _ => false,
        }
    }

    fn attacked_by(&self, sq: (i32, i32), by_white: bool) -> bool {
        for r in 0..8 {
            for f in 0..8 {
                let p = self.at(f, r);
                if p != b'.' && is_white(p) == by_white && self.attacks((f, r), sq) {
                    return true;
                }
            }
        }
        false
    }

    pub fn in_check(&self, white: bool) -> bool {
        let king = if white { b'K' } else { b'k' };
        for r in 0..8 {
            for f in 0..8 {
                if self.at(f, r) == king {
                    return self.attacked_by((f, r), !white);
                }
            }
        }
        false
    }

    fn pseudo_legal(&self, from: (i32, i32), to: (i32, i32)) -> bool {
        let p = self.at(from.0, from.1);
        if p == b'.' || is_white(p) != self.white_to_move {
            return false;
        }
        let target = self.at(to.0, to.1);
        if target != b'.' && is_white(target) == self.white_to_move {
            return false;
        }
        let dx = to.0 - from.0;
        let dy = to.1 - from.1;
        match p.to_ascii_lowercase() {
            b'p' => {
                let dir = if self.white_to_move { 1 } else { -1 };
                let start = if self.white_to_move { 1 } else { 6 };
                if dx == 0 && dy == dir {
                    target == b'.'
                } else if dx == 0 && dy == 2 * dir && from.1 == start {
                    target == b'.' && self.at(from.0, from.1 + dir) == b'.'
                } else if dx.abs() == 1 && dy == dir {
                    target != b'.' || self.ep == Some(to)
                } else {
                    false
                }
            }
            b'k' if dy == 0 && dx.abs() == 2 => self.castle_ok(from, to),
            _ => self.attacks(from, to),
        }
    }

    fn castle_ok(&self, from: (i32, i32), to: (i32, i32)) -> bool {
        let (rank, ks, qs) = if self.white_to_move { (0, 0, 1) } else { (7, 2, 3) };
        if from != (4, rank) {
            return false;
        }
        let rook = if self.white_to_move { b'R' } else { b'r' };
        let kingside = to.0 == 6;
        let (right, rook_file, between): (usize, i32, &[i32]) = if kingside {
            (ks, 7, &[5, 6])
        } else {
            (qs, 0, &[1, 2, 3])
        };
        if !self.castle[right] || self.at(rook_file, rank) != rook {
            return false;
        }
        if between.iter().any(|&f| self.at(f, rank) != b'.') {
            return false;
        }
        let pass = if kingside { 5 } else { 3 };
        !self.in_check(self.white_to_move) && !self.attacked_by((pass, rank), !self.white_to_move)
    }

    pub fn apply(&self, mv: OracleMove) -> OracleBoard {
        let (from, to, promo) = mv;
        let mut b = self.clone();
        let p = b.at(from.0, from.1);
        let lower = p.to_ascii_lowercase();
        if lower == b'p' && Some(to) == self.ep && self.at(to.0, to.1) == b'.' {
            b.cells[from.1 as usize][to.0 as usize] = b'.';
        }
        if lower == b'k' && (to.0 - from.0).abs() == 2 {
            let (rf, nf) = if to.0 == 6 { (7, 5) } else { (0, 3) };
            let rook = b.cells[from.1 as usize][rf];
            b.cells[from.1 as usize][rf] = b'.';
            b.cells[from.1 as usize][nf] = rook;
        }
        b.cells[from.1 as usize][from.0 as usize] = b'.';
        let placed = match promo {
            Some(q) if is_white(p) => q.to_ascii_uppercase(),
            Some(q) => q,
            None => p,
        };
        b.cells[to.1 as usize][to.0 as usize] = placed;
        b.ep = if lower == b'p' && (to.1 - from.1).abs() == 2 {
            Some((from.0, (from.1 + to.1) / 2))
        } else {
            None
        };
        for sq in [from, to] {
            match sq {
                (4, 0) => {
                    b.castle[0] = false;
                    b.castle[1] = false
                }
                (4, 7) => {
                    b.castle[2] = false;
                    b.castle[3] = false
                }
                (7, 0) => b.castle[0] = false,
                (0, 0) => b.castle[1] = false,
                (7, 7) => b.castle[2] = false,
                (0, 7) => b.castle[3] = false,
                _ => {}
            }
        }
        b.white_to_move = !self.white_to_move;
        b
    }

    pub fn legal_moves(&self) -> Vec<OracleMove> {
        let mut out = Vec::new();
        for fr in 0..8 {
            for ff in 0..8 {
                for tr in 0..8 {
                    for tf in 0..8 {
                        let (from, to) = ((ff, fr), (tf, tr));
                        if !self.pseudo_legal(from, to) {
                            continue;
                        }
                        let p = self.at(ff, fr).to_ascii_lowercase();
                        let promos: &[Option<u8>] = if p == b'p' && (tr == 0 || tr == 7) {
                            &[Some(b'q'), Some(b'r'), Some(b'b'), Some(b'n')]
                        } else {
                            &[None]
                        };
                        for &promo in promos {
                            let mv = (from, to, promo);
                            if !self.apply(mv).in_check(self.white_to_move) {
                                out.push(mv);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn white_to_move(&self) -> bool {
        self.white_to_move
    }
}

pub fn perft(board: &OracleBoard, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    board
        .legal_moves()
        .into_iter()
        .map(|mv| perft(&board.apply(mv), depth - 1))
        .sum()
}

/// Coordinate text such as `e2e4` or `e7e8q`.
pub fn move_text(mv: &OracleMove) -> String {
    let ((ff, fr), (tf, tr), promo) = *mv;
    let mut s = format!(
        "{}{}{}{}",
        (b'a' + ff as u8) as char,
        fr + 1,
        (b'a' + tf as u8) as char,
        tr + 1
    );
    if let Some(p) = promo {
        s.push(p as char);
    }
    s
}

pub fn parse_move(text: &str) -> OracleMove {
    let b = text.as_bytes();
    (
        ((b[0] - b'a') as i32, (b[1] - b'1') as i32),
        ((b[2] - b'a') as i32, (b[3] - b'1') as i32),
        b.get(4).copied(),
    )
}
