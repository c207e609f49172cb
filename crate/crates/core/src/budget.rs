use crate::error::{Error, Result};

/// Environment variable that overrides the default enumeration cap.
pub const BUDGET_ENV: &str = "DOPETEST_NODE_BUDGET";

/// Cap on the number of enumerated prefixes (or memoised search nodes) a
/// single bounded operation may create before it gives up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeBudget(pub usize);

impl NodeBudget {
    pub const DEFAULT: NodeBudget = NodeBudget(1_000_000);

    /// Reads [`BUDGET_ENV`], falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(raw) => raw
                .trim()
                .parse::<usize>()
                .map(NodeBudget)
                .map_err(|_| Error::Parse(format!("{BUDGET_ENV}=`{raw}` is not a count"))),
            Err(_) => Ok(Self::DEFAULT),
        }
    }

    pub(crate) fn meter(self) -> Meter {
        Meter {
            used: 0,
            limit: self.0,
        }
    }
}

impl Default for NodeBudget {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug)]
pub(crate) struct Meter {
    used: usize,
    limit: usize,
}

impl Meter {
    pub(crate) fn charge(&mut self, n: usize) -> Result<()> {
        self.used += n;
        if self.used > self.limit {
            Err(Error::Budget(self.limit))
        } else {
            Ok(())
        }
    }
}
