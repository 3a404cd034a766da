use crate::error::{Error, Result};
use crate::numerics::graph::{Graph, NodeId};
use crate::numerics::tensor::{Real, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    /// Updated by the optimizer.
    Trainable,
    /// Carried state such as batch-norm running statistics.
    Buffer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamEntry<T> {
    pub name: String,
    pub tensor: Tensor<T>,
    pub kind: ParamKind,
}

/// Named, ordered collection of model tensors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore<T = f32> {
    entries: Vec<ParamEntry<T>>,
}

impl<T: Real> ParamStore<T> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, tensor: Tensor<T>, kind: ParamKind) -> usize {
        let name = name.into();
        assert!(
            self.index_of(&name).is_none(),
            "duplicate parameter name {name}"
        );
        self.entries.push(ParamEntry { name, tensor, kind });
        self.entries.len() - 1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ParamEntry<T>] {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> &ParamEntry<T> {
        &self.entries[index]
    }

    pub fn tensor(&self, index: usize) -> &Tensor<T> {
        &self.entries[index].tensor
    }

    pub fn tensor_mut(&mut self, index: usize) -> &mut Tensor<T> {
        &mut self.entries[index].tensor
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor<T>> {
        self.index_of(name).map(|i| &self.entries[i].tensor)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor<T>> {
        self.index_of(name).map(move |i| &mut self.entries[i].tensor)
    }

    /// Replaces the tensor stored under `name`, keeping its shape contract.
    pub fn set(&mut self, name: &str, tensor: Tensor<T>) -> Result<()> {
        let slot = self
            .get_mut(name)
            .ok_or_else(|| Error::Checkpoint(format!("unknown parameter `{name}`")))?;
        if slot.shape() != tensor.shape() {
            return Err(Error::dim(format!(
                "parameter `{name}` has shape {:?}, got {:?}",
                slot.shape(),
                tensor.shape()
            )));
        }
        *slot = tensor;
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> ParamStore<U> {
        ParamStore {
            entries: self
                .entries
                .iter()
                .map(|e| ParamEntry {
                    name: e.name.clone(),
                    tensor: e.tensor.cast(),
                    kind: e.kind,
                })
                .collect(),
        }
    }

    /// Places every entry on `graph`.
    ///
    /// Trainable entries accepted by `train` become gradient leaves; everything
    /// else is bound as a constant.
    pub fn bind(&self, graph: &mut Graph<T>, train: impl Fn(&str) -> bool) -> Binding {
        let ids = self
            .entries
            .iter()
            .map(|e| {
                if e.kind == ParamKind::Trainable && train(&e.name) {
                    graph.param(e.tensor.clone())
                } else {
                    graph.constant(e.tensor.clone())
                }
            })
            .collect();
        Binding { ids }
    }
}

impl<T: Real> ParamStore<T> {
    /// Binds everything as constants except entry `index`, which maps to `leaf`.
    pub fn bind_with_leaf(&self, graph: &mut Graph<T>, index: usize, leaf: NodeId) -> Binding {
        let ids = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                if i == index {
                    leaf
                } else {
                    graph.constant(e.tensor.clone())
                }
            })
            .collect();
        Binding { ids }
    }
}

/// Node ids of a [`ParamStore`] placed on a graph, indexed like the store.
#[derive(Clone, Debug)]
pub struct Binding {
    ids: Vec<NodeId>,
}

impl Binding {
    pub fn id(&self, index: usize) -> NodeId {
        self.ids[index]
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }
}
