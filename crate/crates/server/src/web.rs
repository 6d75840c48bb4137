//! HTTP front end: exercise pages, answer submission, the UAC form, and a
//! JSON view of everything for script and browser clients.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use pex_core::api::{ApiError, CatalogEntry, Health, SubmitRequest, UacRequest};
use pex_core::exercises::{
    make_nonce, ExerciseError, ExerciseInstance, ExerciseKind, PartResult, Submission, Verdict,
};
use pex_core::gradebook::summary_line;
use pex_core::identity::verify_uac;
use pex_core::seedgen::validate_user_id;
use serde::Deserialize;
use tokio::net::TcpListener;

use crate::Service;

/// Log message for submissions whose nonce or tag fails to verify.
pub const TAMPER_MESSAGE: &str = "TAMPER: nonce or integrity tag does not verify";

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/health", get(health))
        .route("/catalog", get(catalog))
        .route("/ex/{exercise_id}", get(page).post(submit))
        .route("/uac", post(uac))
        .with_state(service)
}

pub async fn serve(listener: TcpListener, service: Arc<Service>) -> std::io::Result<()> {
    axum::serve(listener, router(service)).await
}

fn wants_json(headers: &HeaderMap, format: Option<&str>) -> bool {
    format == Some("json")
        || headers
            .get(header::ACCEPT)
            .and_then(|v| v.to_str().ok())
            .is_some_and(|v| v.contains("application/json"))
}

fn is_json_body(headers: &HeaderMap) -> bool {
    headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"))
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn document(title: &str, body: &str) -> String {
    format!(
        "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"><title>{}</title></head>\n<body>\n{body}</body>\n</html>\n",
        escape(title)
    )
}

fn error(status: StatusCode, message: impl Into<String>, json: bool) -> Response {
    let message = message.into();
    if json {
        (status, Json(ApiError { error: message })).into_response()
    } else {
        (
            status,
            Html(document("Error", &format!("<p>{}</p>\n", escape(&message)))),
        )
            .into_response()
    }
}

async fn health(State(service): State<Arc<Service>>) -> Json<Health> {
    Json(Health {
        status: "ok".to_string(),
        catalog_size: service.engine.catalog().len(),
    })
}

async fn catalog(State(service): State<Arc<Service>>) -> Json<Vec<CatalogEntry>> {
    Json(
        service
            .engine
            .catalog()
            .iter()
            .map(CatalogEntry::from)
            .collect(),
    )
}

async fn index(State(service): State<Arc<Service>>) -> Html<String> {
    let mut body = String::from("<h1>Exercises</h1>\n<ul>\n");
    for spec in service.engine.catalog() {
        body.push_str(&format!(
            "<li>{} ({}): <code>/ex/{}?user=</code></li>\n",
            escape(spec.kind.title()),
            spec.points,
            escape(&spec.exercise_id)
        ));
    }
    body.push_str("</ul>\n");
    Html(document("Exercises", &body))
}

#[derive(Debug, Deserialize)]
struct PageQuery {
    user: Option<String>,
    format: Option<String>,
}

fn fresh_nonce() -> Vec<u8> {
    let ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    make_nonce(ms, rand::random())
}

fn map_exercise_error(e: ExerciseError, json: bool) -> Response {
    let status = match e {
        ExerciseError::UnknownExercise(_) => StatusCode::NOT_FOUND,
        _ => StatusCode::BAD_REQUEST,
    };
    error(status, e.to_string(), json)
}

async fn page(
    State(service): State<Arc<Service>>,
    Path(exercise_id): Path<String>,
    Query(query): Query<PageQuery>,
    headers: HeaderMap,
) -> Response {
    let json = wants_json(&headers, query.format.as_deref());
    let spec = match service.engine.spec(&exercise_id) {
        Ok(s) => s,
        Err(e) => return map_exercise_error(e, json),
    };
    let Some(user) = query.user else {
        return error(StatusCode::BAD_REQUEST, "missing user", json);
    };
    let nonce = spec.kind.uses_nonce().then(fresh_nonce);
    match service
        .engine
        .generate(&exercise_id, &user, nonce.as_deref())
    {
        Ok(instance) if json => Json(instance).into_response(),
        Ok(instance) => Html(render_page(&instance)).into_response(),
        Err(e) => map_exercise_error(e, json),
    }
}

fn render_page(instance: &ExerciseInstance) -> String {
    let title = instance.kind.title();
    let mut body = format!(
        "<h1>{}</h1>\n<p>UserID: {}</p>\n",
        escape(title),
        escape(&instance.user_id)
    );
    body.push_str(&format!("<pre>{}</pre>\n", escape(&instance.statement)));
    if !instance.params.is_empty() {
        body.push_str("<table>\n");
        for (name, value) in &instance.params {
            body.push_str(&format!(
                "<tr><th>{}</th><td><pre>{}</pre></td></tr>\n",
                escape(name),
                escape(value)
            ));
        }
        body.push_str("</table>\n");
    }
    body.push_str(&format!(
        "<form method=\"post\" action=\"/ex/{}\">\n",
        escape(&instance.exercise_id)
    ));
    for (name, value) in [
        ("user", instance.user_id.clone()),
        ("nonce", hex::encode(&instance.nonce)),
        ("tag", hex::encode(&instance.integrity_tag)),
    ] {
        body.push_str(&format!(
            "<input type=\"hidden\" name=\"{name}\" value=\"{}\">\n",
            escape(&value)
        ));
    }
    for field in &instance.answer_fields {
        let name = escape(field);
        if matches!(field.as_str(), "m" | "M" | "Cb") {
            body.push_str(&format!("<p><label>{name}<br><textarea name=\"{name}\" rows=\"4\" cols=\"72\"></textarea></label></p>\n"));
        } else {
            body.push_str(&format!(
                "<p><label>{name} <input name=\"{name}\" size=\"72\"></label></p>\n"
            ));
        }
    }
    body.push_str("<p><button type=\"submit\">Submit</button></p>\n</form>\n");
    document(title, &body)
}

fn render_verdict(verdict: &Verdict) -> String {
    let mut body = format!("<pre>{}</pre>\n", escape(&verdict.feedback_text));
    if let Some(link) = verdict.reward.as_deref().filter(|r| r.starts_with('/')) {
        body.push_str(&format!(
            "<p><a href=\"{}\">Continue</a></p>\n",
            escape(link)
        ));
    }
    document("Feedback", &body)
}

/// The fields of a submission, from either a JSON or a form body. Form
/// bodies carry answers as top-level fields next to `user`, `nonce` and `tag`.
fn parse_submission(headers: &HeaderMap, body: &[u8]) -> Result<SubmitRequest, String> {
    if is_json_body(headers) {
        return serde_json::from_slice(body).map_err(|e| e.to_string());
    }
    let pairs: Vec<(String, String)> =
        serde_urlencoded::from_bytes(body).map_err(|e| e.to_string())?;
    let mut request = SubmitRequest {
        user: String::new(),
        answers: BTreeMap::new(),
        nonce: String::new(),
        tag: String::new(),
    };
    for (key, value) in pairs {
        match key.as_str() {
            "user" => request.user = value,
            "nonce" => request.nonce = value,
            "tag" => request.tag = value,
            _ => {
                request.answers.insert(key, value);
            }
        }
    }
    if request.user.is_empty() {
        return Err("missing user".into());
    }
    Ok(request)
}

async fn submit(
    State(service): State<Arc<Service>>,
    Path(exercise_id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Response {
    let json = is_json_body(&headers) || wants_json(&headers, None);
    if let Err(e) = service.engine.spec(&exercise_id) {
        return map_exercise_error(e, json);
    }
    let request = match parse_submission(&headers, &body) {
        Ok(r) => r,
        Err(e) => {
            return error(
                StatusCode::BAD_REQUEST,
                format!("malformed submission: {e}"),
                json,
            )
        }
    };
    if let Err(e) = validate_user_id(&request.user) {
        return error(StatusCode::BAD_REQUEST, e.to_string(), json);
    }
    // Undecodable hex is an altered nonce or tag like any other.
    let decoded = hex::decode(request.nonce.trim())
        .ok()
        .zip(hex::decode(request.tag.trim()).ok());
    let result = match decoded {
        Some((nonce, integrity_tag)) => service.engine.check(&Submission {
            exercise_id: exercise_id.clone(),
            user_id: request.user.clone(),
            fields: request.answers,
            nonce,
            integrity_tag,
            received_at: Utc::now(),
        }),
        None => Err(ExerciseError::Integrity),
    };
    match result {
        Ok(verdict) => {
            service.log(&exercise_id, &request.user, &verdict.summary());
            if json {
                Json(verdict).into_response()
            } else {
                Html(render_verdict(&verdict)).into_response()
            }
        }
        Err(ExerciseError::Integrity) => {
            service.log(&exercise_id, &request.user, TAMPER_MESSAGE);
            error(
                StatusCode::BAD_REQUEST,
                ExerciseError::Integrity.to_string(),
                json,
            )
        }
        Err(e) => map_exercise_error(e, json),
    }
}

/// Log and verdict id for codes posted to `/uac`.
fn uac_exercise_id(service: &Service) -> String {
    service
        .engine
        .catalog()
        .iter()
        .find(|s| s.kind == ExerciseKind::Uac)
        .map_or_else(|| "uac".to_string(), |s| s.exercise_id.clone())
}

async fn uac(State(service): State<Arc<Service>>, headers: HeaderMap, body: Bytes) -> Response {
    let json = is_json_body(&headers) || wants_json(&headers, None);
    let request: Result<UacRequest, String> = if is_json_body(&headers) {
        serde_json::from_slice(&body).map_err(|e| e.to_string())
    } else {
        serde_urlencoded::from_bytes(&body).map_err(|e| e.to_string())
    };
    let request = match request {
        Ok(r) => r,
        Err(e) => {
            return error(
                StatusCode::BAD_REQUEST,
                format!("malformed submission: {e}"),
                json,
            )
        }
    };
    let correct = verify_uac(&service.roster, &request.user, &request.code);
    let line = if correct {
        "Your user authentication code is correct."
    } else {
        "Your user authentication code is wrong."
    };
    let exercise_id = uac_exercise_id(&service);
    let verdict = Verdict {
        exercise_id: exercise_id.clone(),
        user_id: request.user.clone(),
        parts: vec![PartResult {
            name: "code".to_string(),
            correct,
            message: line.to_string(),
        }],
        correct_count: correct as usize,
        total: 1,
        feedback_text: format!("UserID: {}\n\n{line}\n", request.user),
        reward: None,
    };
    if validate_user_id(&request.user).is_ok() {
        service.log(
            &exercise_id,
            &request.user,
            &summary_line(verdict.correct_count, 1),
        );
    }
    if json {
        Json(verdict).into_response()
    } else {
        Html(render_verdict(&verdict)).into_response()
    }
}
