//! Probabilistic bisimilarity by signature-based partition refinement.

use std::collections::{BTreeMap, HashMap};

use crate::chain::{disjoint_union, Indexed, OpenMarkovChain, Outcome, PointedChain, StateId, Target};
use crate::distribution::SubDistribution;
use crate::error::Result;
use crate::rational::Rational;
use crate::semantics::reachable_chain;
use crate::term::{Label, Name, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    states: Vec<StateId>,
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    fn from_assignment(states: Vec<StateId>, block_of: Vec<usize>) -> Self {
        let count = block_of.iter().map(|b| b + 1).max().unwrap_or(0);
        let mut blocks = vec![Vec::new(); count];
        for (i, &b) in block_of.iter().enumerate() {
            blocks[b].push(i);
        }
        Partition {
            states,
            block_of,
            blocks,
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Blocks as lists of state positions, ordered by their first member.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_ids(&self) -> Vec<Vec<StateId>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&i| self.states[i].clone()).collect())
            .collect()
    }

    /// Block index of the state at position `i`.
    pub fn block_index(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.block_of
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.block_of[i] == self.block_of[j]
    }

    pub fn block_of(&self, s: &str) -> Option<usize> {
        self.states.iter().position(|x| x == s).map(|i| self.block_of[i])
    }
}

type Signature = (Vec<(Name, Rational)>, Vec<(Label, usize, Rational)>);

fn signature(row: &[(Target, Rational)], block_of: &[usize]) -> Signature {
    let mut exits: BTreeMap<Name, Rational> = BTreeMap::new();
    let mut steps: BTreeMap<(Label, usize), Rational> = BTreeMap::new();
    for (t, p) in row {
        match t {
            Target::Exit(x) => *exits.entry(x.clone()).or_default() += p,
            Target::Step(a, j) => *steps.entry((a.clone(), block_of[*j])).or_default() += p,
        }
    }
    (
        exits.into_iter().collect(),
        steps.into_iter().map(|((a, b), p)| (a, b, p)).collect(),
    )
}

pub(crate) fn refine(ix: &Indexed) -> Vec<usize> {
    let n = ix.len();
    let mut block_of = vec![0usize; n];
    let mut count = usize::from(n > 0);
    loop {
        let mut fresh: HashMap<(usize, Signature), usize> = HashMap::new();
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let key = (block_of[i], signature(&ix.rows[i], &block_of));
            let len = fresh.len();
            next.push(*fresh.entry(key).or_insert(len));
        }
        let new_count = fresh.len();
        block_of = next;
        if new_count == count {
            return block_of;
        }
        count = new_count;
    }
}

/// The coarsest partition whose blocks agree on the mass sent to each exit
/// name and to each (label, block) pair.
pub fn bisim_partition(c: &OpenMarkovChain) -> Partition {
    let block_of = refine(&c.indexed());
    Partition::from_assignment(c.states().to_vec(), block_of)
}

/// The quotient chain: one state per block, named after the block's first
/// member. Returns the chain and the block of every original state.
pub fn quotient(c: &OpenMarkovChain, partition: &Partition) -> (OpenMarkovChain, Vec<usize>) {
    let names: Vec<StateId> = partition.blocks().iter().map(|b| c.states()[b[0]].clone()).collect();
    let block_by_id: HashMap<&str, usize> = c
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), partition.block_index(i)))
        .collect();
    let transitions = partition
        .blocks()
        .iter()
        .zip(&names)
        .map(|(b, name)| {
            let rep = &c.states()[b[0]];
            let d: SubDistribution<Outcome> = c.transition(rep).map_outcomes(|o| match o {
                Outcome::Step(a, t) => Outcome::Step(a.clone(), names[block_by_id[t.as_str()]].clone()),
                Outcome::Exit(x) => Outcome::Exit(x.clone()),
            });
            (name.clone(), d)
        })
        .collect();
    (
        OpenMarkovChain::unchecked(names, transitions),
        partition.assignment().to_vec(),
    )
}

pub fn bisimilar(p: &PointedChain, q: &PointedChain) -> bool {
    let (u, inj) = disjoint_union(&p.chain, &q.chain);
    let part = bisim_partition(&u);
    let i = u.index_of(&inj.left[&p.initial]).expect("left initial");
    let j = u.index_of(&inj.right[&q.initial]).expect("right initial");
    part.same_block(i, j)
}

pub fn term_bisimilar(t: &Term, s: &Term) -> Result<bool> {
    Ok(bisimilar(&reachable_chain(t)?, &reachable_chain(s)?))
}
