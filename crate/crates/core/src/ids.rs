//! Identifier newtypes shared by every record kind.

use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Identifier of an L-layer [`Sense`](crate::kb::Sense).
    SenseId
);
string_id!(
    /// Identifier of an [`OLNode`](crate::kb::OLNode).
    NodeId
);
string_id!(FrameId);
string_id!(FrameSetId);
string_id!(AlphaId);
string_id!(StrategyId);
string_id!(CompetencyId);
string_id!(PlanId);
string_id!(
    /// Semantic role label such as `Agent`, `V` or `Theme`.
    Role
);

impl Role {
    /// The label every frame uses at its verb position.
    pub fn verb() -> Self {
        Role::new("V")
    }

    pub fn is_verb(&self) -> bool {
        self.0 == "V"
    }
}
