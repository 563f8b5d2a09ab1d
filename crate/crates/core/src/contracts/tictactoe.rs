//! Tic-tac-toe board; cells are indexed 0..=8 row by row.

use std::fmt;

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ongoing,
    /// Winner by player index (0 plays X).
    Win(usize),
    Draw,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TicTacToe {
    cells: [Option<usize>; 9],
}

impl TicTacToe {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn to_move(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count() % 2
    }

    pub fn play(&self, cell_text: &str) -> Result<TicTacToe, String> {
        let cell: usize = cell_text.parse().map_err(|_| format!("malformed cell {cell_text:?}"))?;
        if cell > 8 {
            return Err(format!("cell {cell} out of range"));
        }
        if self.cells[cell].is_some() {
            return Err(format!("cell {cell} is taken"));
        }
        let mut next = self.clone();
        next.cells[cell] = Some(self.to_move());
        Ok(next)
    }

    pub fn outcome(&self) -> Outcome {
        for line in LINES {
            if let Some(p) = self.cells[line[0]] {
                if line.iter().all(|&i| self.cells[i] == Some(p)) {
                    return Outcome::Win(p);
                }
            }
        }
        if self.cells.iter().all(Option::is_some) {
            Outcome::Draw
        } else {
            Outcome::Ongoing
        }
    }
}

impl fmt::Display for TicTacToe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cells {
            f.write_str(match c {
                None => ".",
                Some(0) => "X",
                Some(_) => "O",
            })?;
        }
        Ok(())
    }
}
