use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::{json, Value};
use uuid::Uuid;

use tagbrowse::{Collection, Error};

/// Error reply of the REST API: an HTTP status plus a JSON body
/// `{error, message, detail}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: &'a str,
    detail: &'a Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn session_not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "session_not_found", format!("no session `{id}`"))
            .with_detail(json!({ "session": id }))
    }

    pub fn collection_not_found(name: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "collection_not_found",
            format!("no collection named `{name}`"),
        )
        .with_detail(json!({ "collection": name }))
    }

    /// Maps an engine error raised while applying an action.
    pub fn from_action_error(c: &Collection, session: Uuid, err: Error) -> Self {
        let (reason, tag) = match &err {
            Error::NotSelectable(t) => ("not_selectable", c.tag_label(*t).to_owned()),
            Error::NotActive(t) => ("not_active", c.tag_label(*t).to_owned()),
            Error::UnknownTagLabel(label) => ("unknown_tag", label.clone()),
            Error::UnknownTag(t) => ("unknown_tag", t.to_string()),
            _ => return Self::internal(err),
        };
        Self::new(StatusCode::CONFLICT, "invalid_action", err.to_string()).with_detail(json!({
            "reason": reason,
            "tag": tag,
            "session": session.to_string(),
        }))
    }

    pub fn internal(err: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", err.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code,
            message: &self.message,
            detail: &self.detail,
        };
        (self.status, Json(body)).into_response()
    }
}
