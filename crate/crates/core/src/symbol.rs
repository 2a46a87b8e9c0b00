//! Interned-by-refcount names for agents and atoms.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

macro_rules! symbol {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Arc<str>);

        impl $name {
            /// Panics on an empty name; the parser never produces one.
            pub fn new(name: impl AsRef<str>) -> Self {
                let name = name.as_ref();
                assert!(!name.is_empty(), concat!(stringify!($name), " name must be non-empty"));
                $name(Arc::from(name))
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

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name::new(s)
            }
        }
    };
}

symbol!(
    /// An agent name such as `obs` or `act`.
    Agent
);

symbol!(
    /// A grounded proposition symbol such as `at_act_home`.
    Atom
);
