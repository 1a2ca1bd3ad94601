//! Word metrics by breadth-first enumeration, with closed forms where the
//! standard generating set has a known geodesic normal form.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Element, GeneratingSet, Group};
use crate::error::{Error, Result};

/// Bumped whenever the enumeration or the on-disk format changes.
pub const BALL_FORMAT_VERSION: u32 = 1;

/// Hard caps on ball enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub radius_cap: usize,
    pub max_elements: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            radius_cap: 64,
            max_elements: 4_000_000,
        }
    }
}

/// All elements of word length at most `radius`, keyed by normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordMetricBall {
    pub radius: usize,
    pub elements: BTreeMap<Element, usize>,
}

impl WordMetricBall {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.elements.contains_key(g)
    }

    /// Number of elements at each exact length `0..=radius`.
    pub fn sphere_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.radius + 1];
        for &l in self.elements.values() {
            out[l] += 1;
        }
        out
    }
}

/// Incremental BFS state: lengths of everything found so far and the last sphere.
#[derive(Debug)]
struct Bfs {
    radius: usize,
    lengths: HashMap<Element, usize>,
    frontier: Vec<Element>,
    exhausted: bool,
}

impl Bfs {
    fn new(group: &Group) -> Self {
        let e = group.identity();
        let mut lengths = HashMap::new();
        lengths.insert(e.clone(), 0);
        Self {
            radius: 0,
            lengths,
            frontier: vec![e],
            exhausted: false,
        }
    }

    /// Grows by one sphere; right multiplication by generators.
    fn grow(&mut self, group: &Group, gens: &GeneratingSet, limits: &Limits) -> Result<()> {
        if self.radius >= limits.radius_cap {
            return Err(Error::RadiusExceeded {
                cap: limits.radius_cap,
            });
        }
        let next_len = self.radius + 1;
        let mut next = Vec::new();
        for g in &self.frontier {
            for s in gens.elements() {
                let h = group.mul_unchecked(g, s);
                if !self.lengths.contains_key(&h) {
                    if self.lengths.len() >= limits.max_elements {
                        return Err(Error::Resource(format!(
                            "ball enumeration exceeded {} elements at radius {next_len}",
                            limits.max_elements
                        )));
                    }
                    self.lengths.insert(h.clone(), next_len);
                    next.push(h);
                }
            }
        }
        next.sort();
        self.exhausted = next.is_empty();
        self.frontier = next;
        self.radius = next_len;
        Ok(())
    }
}

/// Enumerates the ball of the given radius. Consults and fills `cache` when given.
pub fn ball(
    group: &Group,
    gens: &GeneratingSet,
    radius: usize,
    limits: &Limits,
    cache: Option<&BallCache>,
) -> Result<WordMetricBall> {
    if radius > limits.radius_cap {
        return Err(Error::RadiusExceeded {
            cap: limits.radius_cap,
        });
    }
    if let Some(cache) = cache {
        if let Some(b) = cache.load(group, gens, radius)? {
            return Ok(b);
        }
    }
    let mut bfs = Bfs::new(group);
    while bfs.radius < radius && !bfs.exhausted {
        bfs.grow(group, gens, limits)?;
    }
    let result = WordMetricBall {
        radius,
        elements: bfs.lengths.into_iter().collect(),
    };
    if let Some(cache) = cache {
        cache.store(group, gens, &result)?;
    }
    Ok(result)
}

/// Word metric `d_S(e, ·)`; the BFS ball grows lazily and is shared across threads.
#[derive(Debug)]
pub struct WordMetric {
    group: Group,
    gens: GeneratingSet,
    limits: Limits,
    standard: bool,
    bfs: Mutex<Bfs>,
}

impl WordMetric {
    pub fn new(group: &Group, gens: &GeneratingSet, limits: Limits) -> Self {
        let std = group.generators();
        let standard = gens.len() == std.len()
            && std.elements().iter().all(|g| gens.elements().contains(g));
        Self {
            group: group.clone(),
            gens: gens.clone(),
            limits,
            standard,
            bfs: Mutex::new(Bfs::new(group)),
        }
    }

    /// Metric for the group's standard symmetric generating set.
    pub fn standard(group: &Group, limits: Limits) -> Self {
        Self::new(group, &group.generators(), limits)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn generators(&self) -> &GeneratingSet {
        &self.gens
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    /// `|g|_S`. Fails with `RadiusExceeded` when `g` is beyond the radius cap.
    pub fn length(&self, g: &Element) -> Result<usize> {
        if self.standard {
            if let Some(l) = self.group.closed_form_length(g) {
                return Ok(l);
            }
        }
        let mut bfs = self.bfs.lock().expect("word metric lock poisoned");
        loop {
            if let Some(&l) = bfs.lengths.get(g) {
                return Ok(l);
            }
            if bfs.exhausted {
                return Err(Error::Domain(format!(
                    "{} is not generated by the given set",
                    self.group.display(g)
                )));
            }
            bfs.grow(&self.group, &self.gens, &self.limits)?;
        }
    }

    /// `|gh|_S`, without building `gh` when a closed form allows it.
    pub fn product_length(&self, g: &Element, h: &Element) -> Result<usize> {
        if self.standard {
            match (g, h) {
                (Element::Free(x), Element::Free(y)) => {
                    let cancel = x
                        .iter()
                        .rev()
                        .zip(y.iter())
                        .take_while(|(a, b)| **a == -**b)
                        .count();
                    return Ok(x.len() + y.len() - 2 * cancel);
                }
                (Element::Lattice(x), Element::Lattice(y)) => {
                    return Ok(x
                        .iter()
                        .zip(y)
                        .map(|(a, b)| (a + b).unsigned_abs() as usize)
                        .sum())
                }
                _ => {}
            }
        }
        self.length(&self.group.mul_unchecked(g, h))
    }

    /// `d_S(g, h) = |g⁻¹h|_S`.
    pub fn distance(&self, g: &Element, h: &Element) -> Result<usize> {
        let gi = self.group.inverse(g)?;
        self.length(&self.group.mul_unchecked(&gi, h))
    }

    pub fn ball(&self, radius: usize, cache: Option<&BallCache>) -> Result<WordMetricBall> {
        ball(&self.group, &self.gens, radius, &self.limits, cache)
    }
}

/// Free function form of [`WordMetric::length`] with default limits.
pub fn word_length(group: &Group, g: &Element, gens: &GeneratingSet, limits: Limits) -> Result<usize> {
    group.check(g)?;
    WordMetric::new(group, gens, limits).length(g)
}

/// Directory of enumerated balls in JSON-lines files.
///
/// Line one is a header `{version, group, generators, radius, count}`, every
/// following line an `[element, length]` pair in normal-form order.
#[derive(Clone, Debug)]
pub struct BallCache {
    dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct CacheHeader {
    version: u32,
    group: Group,
    generators: Vec<Element>,
    radius: usize,
    count: usize,
}

impl BallCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    /// Cache in `$CAT0LAB_CACHE_DIR`, if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os("CAT0LAB_CACHE_DIR") {
            Some(d) if !d.is_empty() => Ok(Some(Self::new(PathBuf::from(d))?)),
            _ => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn key(group: &Group, gens: &GeneratingSet, radius: usize) -> String {
        let mut h = Sha256::new();
        h.update(BALL_FORMAT_VERSION.to_le_bytes());
        h.update(serde_json::to_vec(group).expect("group serializes"));
        h.update(serde_json::to_vec(gens.elements()).expect("elements serialize"));
        h.update((radius as u64).to_le_bytes());
        hex::encode(h.finalize())
    }

    pub fn path_for(&self, group: &Group, gens: &GeneratingSet, radius: usize) -> PathBuf {
        self.dir
            .join(format!("ball-{}.jsonl", &Self::key(group, gens, radius)[..32]))
    }

    /// Loads a cached ball; a file whose header does not match is ignored.
    pub fn load(
        &self,
        group: &Group,
        gens: &GeneratingSet,
        radius: usize,
    ) -> Result<Option<WordMetricBall>> {
        let path = self.path_for(group, gens, radius);
        let file = match fs::File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let mut lines = BufReader::new(file).lines();
        let header: CacheHeader = match lines.next() {
            Some(line) => match serde_json::from_str(&line?) {
                Ok(h) => h,
                Err(_) => return Ok(None),
            },
            None => return Ok(None),
        };
        if header.version != BALL_FORMAT_VERSION
            || &header.group != group
            || header.generators != gens.elements()
            || header.radius != radius
        {
            return Ok(None);
        }
        let mut elements = BTreeMap::new();
        for line in lines {
            let (g, l): (Element, usize) = serde_json::from_str(&line?)?;
            elements.insert(g, l);
        }
        if elements.len() != header.count {
            return Ok(None);
        }
        Ok(Some(WordMetricBall { radius, elements }))
    }

    /// Writes atomically through a temporary file.
    pub fn store(&self, group: &Group, gens: &GeneratingSet, ball: &WordMetricBall) -> Result<()> {
        let path = self.path_for(group, gens, ball.radius);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            let header = CacheHeader {
                version: BALL_FORMAT_VERSION,
                group: group.clone(),
                generators: gens.elements().to_vec(),
                radius: ball.radius,
                count: ball.elements.len(),
            };
            serde_json::to_writer(&mut w, &header)?;
            w.write_all(b"\n")?;
            for (g, l) in &ball.elements {
                serde_json::to_writer(&mut w, &(g, l))?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_balls() {
        let lim = Limits::default();
        let z = Group::Lattice { rank: 1 };
        assert_eq!(ball(&z, &z.generators(), 3, &lim, None).unwrap().len(), 7);
        let f2 = Group::Free { rank: 2 };
        let b = ball(&f2, &f2.generators(), 2, &lim, None).unwrap();
        assert_eq!(b.len(), 17);
        assert_eq!(b.sphere_sizes(), vec![1, 4, 12]);
    }

    #[test]
    fn closed_forms_match_bfs() {
        let lim = Limits::default();
        for group in [
            Group::Lattice { rank: 2 },
            Group::Free { rank: 2 },
            Group::DihedralInf,
            Group::Cyclic { order: 9 },
        ] {
            let gens = group.generators();
            let b = ball(&group, &gens, 6, &lim, None).unwrap();
            let m = WordMetric::new(&group, &gens, lim);
            assert!(m.standard);
            for (g, &l) in &b.elements {
                assert_eq!(group.closed_form_length(g), Some(l), "{}", group.name());
            }
        }
    }

    #[test]
    fn radius_cap_is_a_hard_error() {
        let lim = Limits {
            radius_cap: 3,
            max_elements: 1000,
        };
        let g = Group::Grigorchuk;
        let m = WordMetric::standard(&g, lim);
        let far = g.parse_word("abababacabadab").unwrap();
        assert!(matches!(m.length(&far), Err(Error::RadiusExceeded { cap: 3 })));
        let tiny = Limits {
            radius_cap: 10,
            max_elements: 5,
        };
        assert!(matches!(
            ball(&g, &g.generators(), 3, &tiny, None),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = BallCache::new(dir.path()).unwrap();
        let g = Group::Grigorchuk;
        let gens = g.generators();
        let lim = Limits::default();
        let fresh = ball(&g, &gens, 4, &lim, Some(&cache)).unwrap();
        assert!(cache.path_for(&g, &gens, 4).exists());
        let loaded = cache.load(&g, &gens, 4).unwrap().unwrap();
        assert_eq!(fresh, loaded);
        assert!(cache.load(&g, &gens, 5).unwrap().is_none());
    }

    #[test]
    fn finite_group_not_generated() {
        let c6 = Group::Cyclic { order: 6 };
        let gens = GeneratingSet::symmetric_closure(&c6, vec![Element::Cyclic(2)]).unwrap();
        let m = WordMetric::new(&c6, &gens, Limits::default());
        assert_eq!(m.length(&Element::Cyclic(4)).unwrap(), 1);
        assert!(matches!(m.length(&Element::Cyclic(1)), Err(Error::Domain(_))));
    }
}
