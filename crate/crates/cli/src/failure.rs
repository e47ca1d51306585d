//! Exit-code classification: bad input or usage exits 2, anything else 1.

use std::fmt;

#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    pub fn input(msg: impl fmt::Display) -> Self {
        Self::Input(anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::Internal(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (Self::Input(e) | Self::Internal(e)) = self;
        write!(f, "{e:#}")
    }
}

pub trait ResultExt<T> {
    /// Treat an error as a problem with the user's input.
    fn input<C: fmt::Display + Send + Sync + 'static>(self, ctx: impl FnOnce() -> C) -> Result<T, Failure>;
    fn internal<C: fmt::Display + Send + Sync + 'static>(self, ctx: impl FnOnce() -> C) -> Result<T, Failure>;
}

impl<T, E> ResultExt<T> for Result<T, E>
where
    E: std::error::Error + Send + Sync + 'static,
{
    fn input<C: fmt::Display + Send + Sync + 'static>(self, ctx: impl FnOnce() -> C) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(anyhow::Error::new(e).context(ctx())))
    }

    fn internal<C: fmt::Display + Send + Sync + 'static>(self, ctx: impl FnOnce() -> C) -> Result<T, Failure> {
        self.map_err(|e| Failure::Internal(anyhow::Error::new(e).context(ctx())))
    }
}
