//! Steady-state genetic search at an exact length.
//!
//! A genome fixes how the length is split across outputs and holds one
//! gene per stage. Decoding takes every index modulo the size of the list
//! it selects from, so any gene decodes to some term. Fitness is the
//! number of counterexamples a candidate matches.

use super::cex::CexSet;
use super::{Problem, Search};
use crate::jst::{OutputTerm, Pipeline, Stage};
use crate::vcgen::Candidate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gene {
    pub op: u32,
    pub lambda: u32,
    pub constant: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    pub source: u32,
    pub variant: u32,
    pub genes: Vec<Gene>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genome {
    pub parts: Vec<Part>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub replacement_rate: f64,
    pub mutation_rate: f64,
    pub generations: usize,
    pub seed: u64,
}

/// Individuals replaced per generation; at least one.
pub fn replacement_count(population: usize, rate: f64) -> usize {
    ((population as f64 * rate).round() as usize).max(1)
}

fn random_gene(rng: &mut ChaCha8Rng) -> Gene {
    Gene { op: rng.gen(), lambda: rng.gen(), constant: rng.gen() }
}

/// A random split of `l` into `n` parts of at most `max` each.
fn random_split(rng: &mut ChaCha8Rng, l: usize, n: usize, max: usize) -> Option<Vec<usize>> {
    if l > n * max {
        return None;
    }
    let mut split = vec![0; n];
    let mut left = l;
    while left > 0 {
        let k = rng.gen_range(0..n);
        if split[k] < max {
            split[k] += 1;
            left -= 1;
        }
    }
    Some(split)
}

fn random_genome(rng: &mut ChaCha8Rng, p: &Problem, l: usize) -> Option<Genome> {
    let split = random_split(rng, l, p.outs.len(), p.max_len)?;
    let parts = split
        .into_iter()
        .map(|k| Part { source: rng.gen(), variant: rng.gen(), genes: (0..k).map(|_| random_gene(rng)).collect() })
        .collect();
    Some(Genome { parts })
}

fn pick<T: Copy>(xs: &[T], i: u32) -> Option<T> {
    (!xs.is_empty()).then(|| xs[i as usize % xs.len()])
}

fn stage(p: &Problem, g: Gene) -> Option<Stage> {
    let gr = &p.grammar;
    match g.op % 5 {
        0 => pick(&gr.preds[1..], g.lambda).map(Stage::Filter),
        1 => pick(&gr.mappers, g.lambda).map(Stage::Map),
        2 => Some(Stage::Sorted),
        3 => pick(&gr.counts, g.constant).map(Stage::Skip),
        _ => pick(&gr.counts, g.constant).map(Stage::Limit),
    }
}

/// Decodes a genome. Stages that select from an empty list fall back to
/// `sorted()`, and `add` of a constant is only read from single-gene
/// list parts.
pub fn decode(p: &Problem, g: &Genome) -> Candidate {
    let terms = g
        .parts
        .iter()
        .zip(p.outs.iter().enumerate())
        .map(|(part, (o, out))| {
            if part.genes.is_empty() {
                return OutputTerm::Unchanged;
            }
            let source = pick(&p.sources, part.source).expect("a list parameter exists");
            let stages = |genes: &[Gene]| genes.iter().map(|&g| stage(p, g).unwrap_or(Stage::Sorted)).collect();
            if out.is_list() {
                match part.variant % 3 {
                    2 if part.genes.len() == 1 && !p.grammar.pool.is_empty() => {
                        OutputTerm::AddLast(pick(&p.grammar.pool, part.genes[0].constant).expect("non-empty pool"))
                    }
                    1 => OutputTerm::Append(Pipeline { source, stages: stages(&part.genes) }),
                    _ => OutputTerm::Replace(Pipeline { source, stages: stages(&part.genes) }),
                }
            } else {
                let (last, init) = part.genes.split_last().expect("non-empty");
                match pick(&p.terminals[o], last.lambda) {
                    Some(t) => OutputTerm::Scalar(Pipeline { source, stages: stages(init) }, t),
                    None => OutputTerm::Unchanged,
                }
            }
        })
        .collect();
    Candidate { terms }
}

struct Individual {
    genome: Genome,
    solved: Vec<bool>,
    fitness: usize,
}

fn evaluate(p: &Problem, cex: &CexSet, genome: Genome, buf: &mut Vec<i32>) -> Individual {
    let c = decode(p, &genome);
    let solved: Vec<bool> = (0..cex.len()).map(|i| cex.agrees(i, &c, &p.outs, buf)).collect();
    let fitness = solved.iter().filter(|&&s| s).count();
    Individual { genome, solved, fitness }
}

const TOURNAMENT: usize = 3;

fn tournament(rng: &mut ChaCha8Rng, pop: &[Individual]) -> usize {
    (0..TOURNAMENT).map(|_| rng.gen_range(0..pop.len())).max_by_key(|&i| pop[i].fitness).expect("non-empty")
}

/// A second parent that solves the most counterexamples the first does
/// not.
fn partner(rng: &mut ChaCha8Rng, pop: &[Individual], a: usize) -> usize {
    let gain = |i: usize| pop[i].solved.iter().zip(&pop[a].solved).filter(|(&x, &y)| x && !y).count();
    (0..TOURNAMENT).map(|_| rng.gen_range(0..pop.len())).max_by_key(|&i| (gain(i), pop[i].fitness)).expect("non-empty")
}

fn crossover(rng: &mut ChaCha8Rng, a: &Genome, b: &Genome) -> Genome {
    let same_split = a.parts.iter().zip(&b.parts).all(|(x, y)| x.genes.len() == y.genes.len());
    let parts = a
        .parts
        .iter()
        .zip(&b.parts)
        .map(|(x, y)| {
            if !same_split && x.genes.len() != y.genes.len() {
                return x.clone();
            }
            let (base, other) = if rng.gen_bool(0.5) { (x, y) } else { (y, x) };
            let mut part = base.clone();
            for (g, o) in part.genes.iter_mut().zip(&other.genes) {
                if rng.gen_bool(0.5) {
                    *g = *o;
                }
            }
            part
        })
        .collect();
    Genome { parts }
}

fn mutate(rng: &mut ChaCha8Rng, g: &mut Genome, rate: f64) {
    for part in &mut g.parts {
        if rng.gen_bool(rate) {
            part.source = rng.gen();
        }
        if rng.gen_bool(rate) {
            part.variant = rng.gen();
        }
        for gene in &mut part.genes {
            if rng.gen_bool(rate) {
                gene.op = rng.gen();
            }
            if rng.gen_bool(rate) {
                gene.lambda = rng.gen();
            }
            if rng.gen_bool(rate) {
                gene.constant = rng.gen();
            }
        }
    }
}

/// Evolves candidates of total length `l` until one matches every
/// counterexample or the generation budget runs out.
pub fn search(p: &Problem, cex: &CexSet, l: usize, cfg: &GaConfig, stop: &dyn Fn() -> bool) -> Search {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (l as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut buf = Vec::new();
    let size = cfg.population.max(2);
    let mut pop = Vec::with_capacity(size);
    for _ in 0..size {
        let Some(g) = random_genome(&mut rng, p, l) else {
            return Search::Exhausted;
        };
        let ind = evaluate(p, cex, g, &mut buf);
        if ind.fitness == cex.len() {
            return Search::Found(decode(p, &ind.genome));
        }
        pop.push(ind);
    }
    let replace = replacement_count(size, cfg.replacement_rate).min(size);
    for _ in 0..cfg.generations {
        if stop() {
            return Search::Stopped;
        }
        let mut children = Vec::with_capacity(replace);
        for _ in 0..replace {
            let a = tournament(&mut rng, &pop);
            let b = partner(&mut rng, &pop, a);
            let mut g = crossover(&mut rng, &pop[a].genome, &pop[b].genome);
            mutate(&mut rng, &mut g, cfg.mutation_rate);
            let child = evaluate(p, cex, g, &mut buf);
            if child.fitness == cex.len() {
                return Search::Found(decode(p, &child.genome));
            }
            children.push(child);
        }
        // The weakest individuals make room for the children.
        pop.sort_by_key(|i| std::cmp::Reverse(i.fitness));
        pop.truncate(size - replace);
        pop.extend(children);
    }
    Search::NoProgress
}
