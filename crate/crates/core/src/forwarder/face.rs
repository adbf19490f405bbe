use std::collections::BTreeMap;
use std::fmt;

pub type FaceId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceTransport {
    Tcp,
    Udp,
    Internal,
}

impl fmt::Display for FaceTransport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaceTransport::Tcp => "tcp",
            FaceTransport::Udp => "udp",
            FaceTransport::Internal => "internal",
        })
    }
}

/// A forwarder attachment point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub id: FaceId,
    pub local_uri: String,
    pub remote_uri: String,
    pub transport: FaceTransport,
}

#[derive(Debug, Default)]
pub struct FaceTable {
    faces: BTreeMap<FaceId, Face>,
    next_id: FaceId,
}

impl FaceTable {
    /// Ids start at 1 and are never reused within one table.
    pub fn add(
        &mut self,
        transport: FaceTransport,
        local_uri: impl Into<String>,
        remote_uri: impl Into<String>,
    ) -> FaceId {
        self.next_id += 1;
        let id = self.next_id;
        self.faces.insert(id, Face { id, local_uri: local_uri.into(), remote_uri: remote_uri.into(), transport });
        id
    }

    pub fn remove(&mut self, id: FaceId) -> Option<Face> {
        self.faces.remove(&id)
    }

    pub fn get(&self, id: FaceId) -> Option<&Face> {
        self.faces.get(&id)
    }

    pub fn contains(&self, id: FaceId) -> bool {
        self.faces.contains_key(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Face> {
        self.faces.values()
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }
}
