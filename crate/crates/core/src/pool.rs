use rand::Rng;

/// Set of not-yet-explored vertices supporting O(1) uniform draws and
/// O(1) removals (swap-remove with a position index).
#[derive(Debug, Clone)]
pub struct VertexPool {
    items: Vec<usize>,
    pos: Vec<usize>,
}

const ABSENT: usize = usize::MAX;

impl VertexPool {
    pub fn full(n: usize) -> Self {
        Self {
            items: (0..n).collect(),
            pos: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.pos[v] != ABSENT
    }

    /// Removes `v`; returns false if it was already gone.
    pub fn remove(&mut self, v: usize) -> bool {
        let p = self.pos[v];
        if p == ABSENT {
            return false;
        }
        let last = self.items.pop().expect("pool non-empty when it contains v");
        if last != v {
            self.items[p] = last;
            self.pos[last] = p;
        }
        self.pos[v] = ABSENT;
        true
    }

    /// Uniformly random member, without removing it.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        if self.items.is_empty() {
            None
        } else {
            Some(self.items[rng.random_range(0..self.items.len())])
        }
    }
}
