//! NSGA-II over binary test-selection chromosomes, and the pairwise
//! goal-subset strategy that runs it once per 2- or 3-goal combination.

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::domination::{dominates, DominationWeights};
use crate::error::{Error, Result};
use crate::evaluation::{median, mutation_score, normalized_tet, KillMatrix};
use crate::objective_model::{goal_weights, EffectivenessMatrix, Goal, N_GOALS};
use crate::rng::{stream_rng, streams};
use crate::selection::Selection;

/// Goals optimized together in one run. Always includes the time goal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GoalSubset {
    indices: Vec<usize>,
}

impl GoalSubset {
    pub fn new(indices: Vec<usize>, n_goals: usize, time_index: usize) -> Result<Self> {
        if !(2..=3).contains(&indices.len()) {
            return Err(Error::InvalidInput(format!(
                "goal subsets have 2 or 3 goals, got {}",
                indices.len()
            )));
        }
        if !indices.contains(&time_index) {
            return Err(Error::InvalidInput(
                "goal subset must include the time goal".into(),
            ));
        }
        if let Some(i) = indices.iter().find(|&&i| i >= n_goals) {
            return Err(Error::InvalidInput(format!("goal index {i} out of range")));
        }
        let unique: HashSet<_> = indices.iter().collect();
        if unique.len() != indices.len() {
            return Err(Error::InvalidInput("goal subset has repeated goals".into()));
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn label(&self) -> String {
        self.indices
            .iter()
            .map(|&i| {
                Goal::ALL
                    .get(i)
                    .map_or_else(|| format!("goal{i}"), |g| g.label().to_string())
            })
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Every subset of the time goal plus one or two other goals: pairs first,
/// then triples, each in lexicographic order.
pub fn enumerate_goal_subsets(n_goals: usize, time_index: usize) -> Vec<GoalSubset> {
    let others: Vec<usize> = (0..n_goals).filter(|&i| i != time_index).collect();
    let mut out = Vec::new();
    for &a in &others {
        out.push(GoalSubset {
            indices: vec![time_index, a],
        });
    }
    for (x, &a) in others.iter().enumerate() {
        for &b in &others[x + 1..] {
            out.push(GoalSubset {
                indices: vec![time_index, a, b],
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub genes: Vec<bool>,
    /// Objective values on the active goal subset.
    pub fitness: Vec<f64>,
}

/// Partitions indices of `fitness` into successive non-dominated fronts.
pub fn nondominated_sort(fitness: &[Vec<f64>], w: &DominationWeights) -> Result<Vec<Vec<usize>>> {
    if fitness.is_empty() {
        return Err(Error::InvalidInput(
            "cannot sort an empty population".into(),
        ));
    }
    if let Some(f) = fitness.iter().find(|f| f.len() != w.n_goals()) {
        return Err(Error::mismatch("fitness", w.n_goals(), f.len()));
    }
    Ok(fast_nondominated_sort(fitness, w.weights()))
}

fn fast_nondominated_sort(fitness: &[Vec<f64>], w: &[f64]) -> Vec<Vec<usize>> {
    let n = fitness.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in p + 1..n {
            if dominates(&fitness[p], &fitness[q], w) {
                dominated_by_me[p].push(q);
                domination_count[q] += 1;
            } else if dominates(&fitness[q], &fitness[p], w) {
                dominated_by_me[q].push(p);
                domination_count[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by_me[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Standard NSGA-II crowding distance of each member of one front.
pub fn crowding_distance(front: &[Vec<f64>]) -> Result<Vec<f64>> {
    if front.is_empty() {
        return Err(Error::InvalidInput("cannot crowd an empty front".into()));
    }
    let m = front[0].len();
    if let Some(f) = front.iter().find(|f| f.len() != m) {
        return Err(Error::mismatch("fitness", m, f.len()));
    }
    Ok(crowding(front))
}

#[allow(clippy::needless_range_loop)]
fn crowding(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    for obj in 0..front[0].len() {
        order.sort_by(|&a, &b| front[a][obj].total_cmp(&front[b][obj]));
        let lo = front[order[0]][obj];
        let hi = front[order[n - 1]][obj];
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for k in 1..n - 1 {
            distance[order[k]] += (front[order[k + 1]][obj] - front[order[k - 1]][obj]) / range;
        }
    }
    distance
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nsga2Config {
    pub population: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    /// Per-gene flip probability; `None` means `1 / n_tests`.
    pub mutation_probability: Option<f64>,
    pub seed: u64,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 250,
            crossover_probability: 0.8,
            mutation_probability: None,
            seed: 0,
        }
    }
}

impl Nsga2Config {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidConfig(
                "NSGA-II population must be at least 2".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.crossover_probability) {
            return Err(Error::InvalidConfig(
                "crossover probability must be in [0, 1]".into(),
            ));
        }
        if let Some(p) = self.mutation_probability {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(
                    "mutation probability must be in [0, 1]".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Runs NSGA-II on `subset` and returns the final first front as selections
/// carrying all five objectives.
pub fn nsga2(
    m: &EffectivenessMatrix,
    subset: &GoalSubset,
    config: &Nsga2Config,
) -> Result<Vec<Selection>> {
    nsga2_observed(m, subset, config, |_, _| {})
}

/// [`nsga2`] with a callback receiving the generation number and the
/// population after environmental selection (generation 0 is the initial
/// population).
pub fn nsga2_observed<F>(
    m: &EffectivenessMatrix,
    subset: &GoalSubset,
    config: &Nsga2Config,
    observer: F,
) -> Result<Vec<Selection>>
where
    F: FnMut(usize, &[Chromosome]),
{
    run_nsga2(m, subset, config, streams::NSGA2, observer)
}

struct Member {
    chromosome: Chromosome,
    rank: usize,
    crowding: f64,
}

fn run_nsga2<F>(
    m: &EffectivenessMatrix,
    subset: &GoalSubset,
    config: &Nsga2Config,
    stream: u64,
    mut observer: F,
) -> Result<Vec<Selection>>
where
    F: FnMut(usize, &[Chromosome]),
{
    config.validate()?;
    let n = m.n_tests();
    if n < 2 {
        return Err(Error::InvalidInput(
            "NSGA-II needs at least 2 test cases".into(),
        ));
    }
    if subset.indices.iter().any(|&i| i >= N_GOALS) {
        return Err(Error::InvalidInput(
            "goal subset does not match the matrix".into(),
        ));
    }
    let w = goal_weights().subset(&subset.indices);
    let rows: Vec<&[f64]> = subset
        .indices
        .iter()
        .map(|&i| m.rows()[i].as_slice())
        .collect();
    let evaluate = |genes: Vec<bool>| {
        let fitness = rows.iter().map(|row| m.row_dot(row, &genes)).collect();
        Chromosome { genes, fitness }
    };
    let mutation_p = config.mutation_probability.unwrap_or(1.0 / n as f64);
    let mut rng = stream_rng(config.seed, stream);

    let initial: Vec<Chromosome> = (0..config.population)
        .map(|_| evaluate((0..n).map(|_| rng.gen_bool(0.5)).collect()))
        .collect();
    let mut population = environmental_selection(initial, config.population, w.weights());
    observer(0, &chromosomes(&population));

    for generation in 1..=config.generations {
        let mut offspring = Vec::with_capacity(config.population);
        while offspring.len() < config.population {
            let a = tournament(&population, &mut rng);
            let b = tournament(&population, &mut rng);
            let (mut c1, mut c2) = (a.genes.clone(), b.genes.clone());
            if rng.gen_bool(config.crossover_probability) {
                single_point_crossover(&mut c1, &mut c2, &mut rng);
            }
            bitflip(&mut c1, mutation_p, &mut rng);
            bitflip(&mut c2, mutation_p, &mut rng);
            offspring.push(evaluate(c1));
            if offspring.len() < config.population {
                offspring.push(evaluate(c2));
            }
        }
        let combined: Vec<Chromosome> = population
            .into_iter()
            .map(|mbr| mbr.chromosome)
            .chain(offspring)
            .collect();
        population = environmental_selection(combined, config.population, w.weights());
        observer(generation, &chromosomes(&population));
    }

    let mut seen = HashSet::new();
    population
        .into_iter()
        .filter(|mbr| mbr.rank == 0)
        .filter(|mbr| seen.insert(mbr.chromosome.genes.clone()))
        .map(|mbr| Selection::new(m, mbr.chromosome.genes))
        .collect()
}

fn chromosomes(population: &[Member]) -> Vec<Chromosome> {
    population
        .iter()
        .map(|mbr| mbr.chromosome.clone())
        .collect()
}

/// Keeps `size` members by front rank, then by crowding distance within the
/// front that overflows. Survivors carry their rank and crowding distance.
fn environmental_selection(pool: Vec<Chromosome>, size: usize, w: &[f64]) -> Vec<Member> {
    let fitness: Vec<Vec<f64>> = pool.iter().map(|c| c.fitness.clone()).collect();
    let fronts = fast_nondominated_sort(&fitness, w);
    let mut slots: Vec<Option<Chromosome>> = pool.into_iter().map(Some).collect();
    let mut survivors = Vec::with_capacity(size);
    for (rank, front) in fronts.iter().enumerate() {
        if survivors.len() >= size {
            break;
        }
        let front_fitness: Vec<Vec<f64>> = front.iter().map(|&i| fitness[i].clone()).collect();
        let distance = crowding(&front_fitness);
        let mut order: Vec<usize> = (0..front.len()).collect();
        if survivors.len() + front.len() > size {
            order.sort_by(|&a, &b| {
                distance[b]
                    .partial_cmp(&distance[a])
                    .unwrap_or(Ordering::Equal)
            });
            order.truncate(size - survivors.len());
        }
        for k in order {
            survivors.push(Member {
                chromosome: slots[front[k]]
                    .take()
                    .expect("each index appears in one front"),
                rank,
                crowding: distance[k],
            });
        }
    }
    survivors
}

/// Binary tournament on (rank, crowding distance).
fn tournament<'a>(population: &'a [Member], rng: &mut ChaCha8Rng) -> &'a Chromosome {
    let a = &population[rng.gen_range(0..population.len())];
    let b = &population[rng.gen_range(0..population.len())];
    let better = match a.rank.cmp(&b.rank) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal if b.crowding > a.crowding => b,
        Ordering::Equal => a,
    };
    &better.chromosome
}

fn single_point_crossover(a: &mut [bool], b: &mut [bool], rng: &mut ChaCha8Rng) {
    let point = rng.gen_range(1..a.len());
    a[point..].swap_with_slice(&mut b[point..]);
}

fn bitflip(genes: &mut [bool], p: f64, rng: &mut ChaCha8Rng) {
    for g in genes.iter_mut() {
        if rng.gen_bool(p) {
            *g = !*g;
        }
    }
}

/// One subset's run inside [`pairwise_nsga2`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetRun {
    pub subset: GoalSubset,
    pub front: Vec<Selection>,
    /// Winner-rule score; larger is better.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseOutcome {
    pub best: GoalSubset,
    pub front: Vec<Selection>,
    pub runs: Vec<SubsetRun>,
}

/// Data the winner rule may use to score a subset's front.
#[derive(Debug, Clone, Copy)]
pub struct Evaluation<'a> {
    pub kills: &'a KillMatrix,
    pub times: &'a [f64],
}

/// Runs NSGA-II on all ten goal subsets and keeps the front with the best
/// median `MS − TET` (or, without an evaluation, median mean-of-maximized
/// objectives minus the time objective). Ties keep the earlier subset.
pub fn pairwise_nsga2(
    m: &EffectivenessMatrix,
    config: &Nsga2Config,
    evaluation: Option<Evaluation<'_>>,
) -> Result<PairwiseOutcome> {
    let subsets = enumerate_goal_subsets(N_GOALS, Goal::Time.index());
    let mut runs = Vec::with_capacity(subsets.len());
    for (s, subset) in subsets.into_iter().enumerate() {
        let front = run_nsga2(
            m,
            &subset,
            config,
            streams::PAIRWISE_BASE + s as u64,
            |_, _| {},
        )?;
        let score = front_score(&front, evaluation)?;
        runs.push(SubsetRun {
            subset,
            front,
            score,
        });
    }
    let mut winner = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.score > runs[winner].score {
            winner = i;
        }
    }
    Ok(PairwiseOutcome {
        best: runs[winner].subset.clone(),
        front: runs[winner].front.clone(),
        runs,
    })
}

fn front_score(front: &[Selection], evaluation: Option<Evaluation<'_>>) -> Result<f64> {
    let values = front
        .iter()
        .map(|s| match evaluation {
            Some(e) => {
                Ok(mutation_score(e.kills, &s.include)? - normalized_tet(e.times, &s.include)?)
            }
            None => {
                let o = &s.objectives;
                let maximized: f64 =
                    Goal::ALL[1..].iter().map(|&g| o.get(g)).sum::<f64>() / (N_GOALS - 1) as f64;
                Ok(maximized - o.get(Goal::Time))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(median(&values).unwrap_or(f64::NEG_INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domination::Direction;

    #[test]
    fn subsets_of_five_and_seven_goals() {
        let five = enumerate_goal_subsets(5, 0);
        assert_eq!(five.len(), 10);
        assert!(five.iter().all(|s| s.indices()[0] == 0));
        assert_eq!(five[0].indices(), &[0, 1]);
        assert_eq!(five[4].indices(), &[0, 1, 2]);
        assert_eq!(enumerate_goal_subsets(7, 0).len(), 21);
    }

    #[test]
    fn subset_validation() {
        assert!(GoalSubset::new(vec![0, 2], 5, 0).is_ok());
        assert!(GoalSubset::new(vec![1, 2], 5, 0).is_err());
        assert!(GoalSubset::new(vec![0], 5, 0).is_err());
        assert!(GoalSubset::new(vec![0, 1, 2, 3], 5, 0).is_err());
        assert!(GoalSubset::new(vec![0, 0], 5, 0).is_err());
        assert!(GoalSubset::new(vec![0, 9], 5, 0).is_err());
    }

    #[test]
    fn sort_examples() {
        let w = DominationWeights::maximize_all(2);
        let mutual = vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]];
        assert_eq!(nondominated_sort(&mutual, &w).unwrap(), vec![vec![0, 1, 2]]);

        let chain: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, i as f64]).collect();
        let fronts = nondominated_sort(&chain, &w).unwrap();
        assert_eq!(fronts, vec![vec![4], vec![3], vec![2], vec![1], vec![0]]);

        assert!(nondominated_sort(&[], &w).is_err());
    }

    #[test]
    fn crowding_examples() {
        assert!(crowding_distance(&[vec![0.1, 0.2], vec![0.3, 0.1]])
            .unwrap()
            .iter()
            .all(|d| d.is_infinite()));
        let d = crowding_distance(&[vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert_eq!(d[1], 2.0);
        let flat = crowding_distance(&[vec![0.3, 0.0], vec![0.3, 0.5], vec![0.3, 1.0]]).unwrap();
        assert_eq!(flat[1], 1.0);
        assert!(crowding_distance(&[]).is_err());
    }

    #[test]
    fn operators_preserve_length() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..100 {
            let mut a = vec![true; 9];
            let mut b = vec![false; 9];
            single_point_crossover(&mut a, &mut b, &mut rng);
            bitflip(&mut a, 0.3, &mut rng);
            assert_eq!((a.len(), b.len()), (9, 9));
        }
    }

    #[test]
    fn minimize_direction_in_sort() {
        let w = DominationWeights::new(vec![Direction::Minimize, Direction::Maximize]);
        let pts = vec![vec![0.2, 0.9], vec![0.1, 0.9]];
        assert_eq!(nondominated_sort(&pts, &w).unwrap(), vec![vec![1], vec![0]]);
    }
}
