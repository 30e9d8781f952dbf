//! Forwarding table: longest-prefix match over name components.

use std::collections::BTreeMap;

use crate::name::Component;

pub type FaceId = u32;

#[derive(Debug, Clone, Default)]
struct Node {
    face: Option<FaceId>,
    children: BTreeMap<Component, Node>,
}

#[derive(Debug, Clone, Default)]
pub struct Fib {
    root: Node,
    len: usize,
}

impl Fib {
    pub fn new() -> Self {
        Self::default()
    }

    /// Routes `prefix` to `face`, replacing any previous route for it.
    pub fn insert(&mut self, prefix: &[Component], face: FaceId) {
        let mut node = &mut self.root;
        for c in prefix {
            node = node.children.entry(c.clone()).or_default();
        }
        if node.face.replace(face).is_none() {
            self.len += 1;
        }
    }

    pub fn remove(&mut self, prefix: &[Component]) -> Option<FaceId> {
        let mut node = &mut self.root;
        for c in prefix {
            node = node.children.get_mut(c)?;
        }
        let old = node.face.take();
        if old.is_some() {
            self.len -= 1;
        }
        old
    }

    /// Face of the longest routed prefix of `components`.
    pub fn longest_prefix_match<C: AsRef<[u8]>>(&self, components: &[C]) -> Option<FaceId> {
        let mut node = &self.root;
        let mut best = node.face;
        for c in components {
            match node.children.get(c.as_ref()) {
                Some(next) => {
                    node = next;
                    best = node.face.or(best);
                }
                None => break,
            }
        }
        best
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// All routes in component order.
    pub fn routes(&self) -> Vec<(Vec<Component>, FaceId)> {
        fn walk(node: &Node, path: &mut Vec<Component>, out: &mut Vec<(Vec<Component>, FaceId)>) {
            if let Some(f) = node.face {
                out.push((path.clone(), f));
            }
            for (c, child) in &node.children {
                path.push(c.clone());
                walk(child, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut out);
        out
    }
}
