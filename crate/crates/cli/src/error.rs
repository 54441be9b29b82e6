use shapeprog_client::ClientError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("cannot write {0}")]
    Output(String),
    #[error("solver stalled on {}", .0.join(", "))]
    Stalled(Vec<String>),
    #[error("provider failure: {0}")]
    Provider(String),
    #[error("service: {0}")]
    Service(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Stalled(_) => 3,
            CliError::Provider(_) => 4,
            CliError::Output(_) | CliError::Service(_) => 1,
        }
    }
}

impl From<ClientError> for CliError {
    fn from(e: ClientError) -> Self {
        match &e {
            ClientError::Status { status: 404 | 422, message } => CliError::Input(message.clone()),
            ClientError::Status { status: 502, message } => CliError::Provider(message.clone()),
            _ => CliError::Service(e.to_string()),
        }
    }
}
