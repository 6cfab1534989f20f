use crate::permkit::{Dims, PBox};
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// One key cell: the position the pixel is moved to and its region state
/// (0 = unfixed, j > 0 = fixed by region j).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub target: u32,
    pub state: u32,
}

/// A candidate decryption key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Individual {
    dims: Dims,
    cells: Vec<Cell>,
}

impl Individual {
    pub fn from_pbox(p: &PBox) -> Self {
        Individual {
            dims: p.dims(),
            cells: p.table().iter().map(|&t| Cell { target: t, state: 0 }).collect(),
        }
    }

    pub fn new(dims: Dims, cells: Vec<Cell>) -> Result<Self> {
        PBox::new(dims, cells.iter().map(|c| c.target).collect())?;
        Ok(Individual { dims, cells })
    }

    /// Fisher–Yates uniform permutation, all cells unfixed.
    pub fn random(dims: Dims, rng: &mut SplitMix64) -> Self {
        let table = rng.permutation(dims.cells());
        Individual {
            dims,
            cells: table.into_iter().map(|t| Cell { target: t, state: 0 }).collect(),
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [Cell] {
        &mut self.cells
    }

    pub fn fixed_count(&self) -> usize {
        self.cells.iter().filter(|c| c.state != 0).count()
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.cells.len()];
        self.cells.iter().all(|c| {
            (c.target as usize) < seen.len() && !std::mem::replace(&mut seen[c.target as usize], true)
        })
    }

    pub fn to_pbox(&self) -> PBox {
        PBox::new(self.dims, self.cells.iter().map(|c| c.target).collect()).expect("individuals stay bijective")
    }
}

/// Fraction of fixed cells.
pub fn fitness(ind: &Individual) -> f64 {
    ind.fixed_count() as f64 / ind.cells.len() as f64
}

/// Child with `a`'s cells before `point` and `b`'s after. Fixed cells of
/// either parent (`a` first) are kept in place, positions already taken are
/// skipped and whatever is left over fills the remaining slots in ascending
/// order.
pub fn crossover_at(a: &Individual, b: &Individual, point: usize) -> Result<Individual> {
    if a.dims != b.dims {
        return Err(Error::dims(a.dims, b.dims));
    }
    let n = a.cells.len();
    let mut child: Vec<Option<Cell>> = vec![None; n];
    let mut used = vec![false; n];
    let mut place = |child: &mut Vec<Option<Cell>>, i: usize, c: Cell| {
        if child[i].is_none() && !used[c.target as usize] {
            used[c.target as usize] = true;
            child[i] = Some(c);
        }
    };
    for parent in [a, b] {
        for (i, &c) in parent.cells.iter().enumerate() {
            if c.state != 0 {
                place(&mut child, i, c);
            }
        }
    }
    for i in 0..n {
        let c = if i < point { a.cells[i] } else { b.cells[i] };
        place(&mut child, i, Cell { target: c.target, state: 0 });
    }
    let mut free = (0..n as u32).filter(|&t| !used[t as usize]);
    let cells = child
        .into_iter()
        .map(|c| c.unwrap_or_else(|| Cell { target: free.next().expect("counts match"), state: 0 }))
        .collect();
    Ok(Individual { dims: a.dims, cells })
}

/// One-point crossover at a uniformly drawn point.
pub fn crossover_one_point(a: &Individual, b: &Individual, seed: u64) -> Result<Individual> {
    let point = SplitMix64::new(seed).below(a.cells.len() as u64 + 1) as usize;
    crossover_at(a, b, point)
}

/// With probability `prob`, swaps the targets of one uniformly chosen pair of
/// adjacent unfixed cells.
pub fn mutate(ind: &Individual, prob: f64, seed: u64) -> Result<Individual> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::invalid(format!("mutation probability {prob} outside [0, 1]")));
    }
    let mut out = ind.clone();
    let mut rng = SplitMix64::new(seed);
    if !rng.bernoulli(prob) {
        return Ok(out);
    }
    let pairs: Vec<usize> = (0..ind.cells.len().saturating_sub(1))
        .filter(|&i| ind.cells[i].state == 0 && ind.cells[i + 1].state == 0)
        .collect();
    if pairs.is_empty() {
        return Ok(out);
    }
    let i = pairs[rng.below(pairs.len() as u64) as usize];
    let t = out.cells[i].target;
    out.cells[i].target = out.cells[i + 1].target;
    out.cells[i + 1].target = t;
    Ok(out)
}
