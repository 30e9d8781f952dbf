//! Hierarchical names: cleartext names with a routable prefix, obfuscated
//! names, and the prefix/suffix helpers used by consumers and producers.

use std::fmt;

use thiserror::Error;

/// A single name component. Components are opaque bytes.
pub type Component = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("a name needs at least one component")]
    Empty,
    #[error("name component {0} is empty")]
    EmptyComponent(usize),
    #[error("routable prefix length {len} is outside 1..={components}")]
    BadPrefixLength { len: usize, components: usize },
    #[error("prefix is not a leading subsequence of the name")]
    PrefixMismatch,
    #[error("prefix covers the whole name; nothing left to obfuscate")]
    EmptySuffix,
    #[error("obfuscated suffix must be non-empty for scheme {0:?}")]
    MissingSuffix(SchemeTag),
    #[error("scheme NONE carries no obfuscated suffix")]
    UnexpectedSuffix,
}

/// A cleartext name: `components[..routable_prefix_len]` is the routable
/// prefix, the rest is the part IBAC may obfuscate.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name {
    components: Vec<Component>,
    routable_prefix_len: usize,
}

impl Name {
    pub fn new(components: Vec<Component>, routable_prefix_len: usize) -> Result<Self, NameError> {
        if components.is_empty() {
            return Err(NameError::Empty);
        }
        if let Some(i) = components.iter().position(|c| c.is_empty()) {
            return Err(NameError::EmptyComponent(i));
        }
        if routable_prefix_len == 0 || routable_prefix_len > components.len() {
            return Err(NameError::BadPrefixLength {
                len: routable_prefix_len,
                components: components.len(),
            });
        }
        Ok(Self {
            components,
            routable_prefix_len,
        })
    }

    /// A name whose every component is routable.
    pub fn routable(components: Vec<Component>) -> Result<Self, NameError> {
        let len = components.len();
        Self::new(components, len.max(1))
    }

    /// Parses `/a/b/c` with the first `routable_prefix_len` components
    /// forming the routable prefix.
    pub fn parse(uri: &str, routable_prefix_len: usize) -> Result<Self, NameError> {
        Self::new(parse_components(uri), routable_prefix_len)
    }

    /// Parses a full name together with its routable prefix, e.g.
    /// `Name::parse_with_prefix("/edu/uci/ics/home.html", "/edu/uci/")`.
    pub fn parse_with_prefix(uri: &str, prefix: &str) -> Result<Self, NameError> {
        let components = parse_components(uri);
        let prefix = parse_components(prefix);
        if !is_leading(&prefix, &components) {
            return Err(NameError::PrefixMismatch);
        }
        Self::new(components, prefix.len())
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn routable_prefix_len(&self) -> usize {
        self.routable_prefix_len
    }

    pub fn routable_prefix(&self) -> &[Component] {
        &self.components[..self.routable_prefix_len]
    }

    /// The same components with every component marked routable; this is
    /// the form a cleartext name takes on the wire.
    pub fn to_fully_routable(&self) -> Name {
        Name {
            components: self.components.clone(),
            routable_prefix_len: self.components.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.components {
            write!(f, "/{}", display_component(c))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Name({self}, prefix={})", self.routable_prefix_len)
    }
}

/// Splits `/a/b/c` into components, ignoring empty segments.
pub fn parse_components(uri: &str) -> Vec<Component> {
    uri.split('/')
        .filter(|s| !s.is_empty())
        .map(|s| s.as_bytes().to_vec())
        .collect()
}

pub fn display_component(c: &[u8]) -> String {
    match std::str::from_utf8(c) {
        Ok(s) if s.chars().all(|ch| ch.is_ascii_graphic() && ch != '/') => s.to_string(),
        _ => hex::encode(c),
    }
}

fn is_leading(prefix: &[Component], components: &[Component]) -> bool {
    prefix.len() <= components.len() && prefix.iter().zip(components).all(|(a, b)| a == b)
}

/// Returns all components of `name` after `prefix`.
pub fn suffix(name: &Name, prefix: &[Component]) -> Result<Vec<Component>, NameError> {
    if !is_leading(prefix, &name.components) {
        return Err(NameError::PrefixMismatch);
    }
    if prefix.len() == name.components.len() {
        return Err(NameError::EmptySuffix);
    }
    Ok(name.components[prefix.len()..].to_vec())
}

/// How the suffix of an [`ObfuscatedName`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeTag {
    None = 0,
    Enc = 1,
    Hash = 2,
}

impl SchemeTag {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Self::None),
            1 => Some(Self::Enc),
            2 => Some(Self::Hash),
            _ => None,
        }
    }
}

/// Routable prefix in the clear followed by one binary obfuscated component.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObfuscatedName {
    routable_prefix: Vec<Component>,
    obfuscated_suffix: Vec<u8>,
    scheme: SchemeTag,
}

impl ObfuscatedName {
    pub fn new(
        routable_prefix: Vec<Component>,
        obfuscated_suffix: Vec<u8>,
        scheme: SchemeTag,
    ) -> Result<Self, NameError> {
        if routable_prefix.is_empty() {
            return Err(NameError::Empty);
        }
        if let Some(i) = routable_prefix.iter().position(|c| c.is_empty()) {
            return Err(NameError::EmptyComponent(i));
        }
        match scheme {
            SchemeTag::None if !obfuscated_suffix.is_empty() => {
                return Err(NameError::UnexpectedSuffix)
            }
            SchemeTag::Enc | SchemeTag::Hash if obfuscated_suffix.is_empty() => {
                return Err(NameError::MissingSuffix(scheme))
            }
            _ => {}
        }
        Ok(Self {
            routable_prefix,
            obfuscated_suffix,
            scheme,
        })
    }

    pub fn routable_prefix(&self) -> &[Component] {
        &self.routable_prefix
    }

    pub fn obfuscated_suffix(&self) -> &[u8] {
        &self.obfuscated_suffix
    }

    pub fn scheme(&self) -> SchemeTag {
        self.scheme
    }
}

impl fmt::Display for ObfuscatedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.routable_prefix {
            write!(f, "/{}", display_component(c))?;
        }
        if !self.obfuscated_suffix.is_empty() {
            write!(f, "/{}", hex::encode(&self.obfuscated_suffix))?;
        }
        Ok(())
    }
}

impl fmt::Debug for ObfuscatedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ObfuscatedName({self}, {:?})", self.scheme)
    }
}

/// The name a message carries: exactly one of a cleartext or an obfuscated name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MessageName {
    Clear(Name),
    Obfuscated(ObfuscatedName),
}

impl MessageName {
    /// Wraps a cleartext name. The routable prefix boundary is not carried
    /// on the wire, so the name is stored fully routable.
    pub fn clear(name: &Name) -> Self {
        MessageName::Clear(name.to_fully_routable())
    }

    /// Components used for longest-prefix forwarding. The obfuscated suffix
    /// counts as a single component.
    pub fn routing_components(&self) -> Vec<&[u8]> {
        match self {
            MessageName::Clear(n) => n.components().iter().map(Vec::as_slice).collect(),
            MessageName::Obfuscated(o) => {
                let mut v: Vec<&[u8]> = o.routable_prefix.iter().map(Vec::as_slice).collect();
                if !o.obfuscated_suffix.is_empty() {
                    v.push(&o.obfuscated_suffix);
                }
                v
            }
        }
    }

    pub fn routable_prefix(&self) -> &[Component] {
        match self {
            MessageName::Clear(n) => n.components(),
            MessageName::Obfuscated(o) => o.routable_prefix(),
        }
    }

    pub fn is_obfuscated(&self) -> bool {
        matches!(self, MessageName::Obfuscated(_))
    }
}

impl fmt::Display for MessageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MessageName::Clear(n) => n.fmt(f),
            MessageName::Obfuscated(o) => o.fmt(f),
        }
    }
}
