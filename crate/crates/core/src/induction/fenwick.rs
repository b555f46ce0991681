/// Binary indexed tree of counts over positions `0..len`.
#[derive(Debug, Clone)]
pub(crate) struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    pub fn new(len: usize) -> Self {
        Fenwick { tree: vec![0; len + 1] }
    }

    /// Tree holding one count at every position flagged in `present`, built in O(len).
    pub fn from_flags(present: &[bool]) -> Self {
        let mut tree = vec![0u32; present.len() + 1];
        for (i, &p) in present.iter().enumerate() {
            tree[i + 1] += u32::from(p);
            let parent = (i + 1) + ((i + 1) & (i + 1).wrapping_neg());
            if parent < tree.len() {
                tree[parent] += tree[i + 1];
            }
        }
        Fenwick { tree }
    }

    pub fn add(&mut self, pos: usize) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count over positions `0..end`.
    pub fn prefix(&self, end: usize) -> usize {
        let mut i = end;
        let mut sum = 0usize;
        while i > 0 {
            sum += self.tree[i] as usize;
            i -= i & i.wrapping_neg();
        }
        sum
    }

    /// Count over positions `start..end`.
    pub fn range(&self, start: usize, end: usize) -> usize {
        if end <= start {
            0
        } else {
            self.prefix(end) - self.prefix(start)
        }
    }
}
