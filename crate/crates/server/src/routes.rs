//! Endpoint handlers. Each one decodes, delegates to one library operation, and encodes.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::Response;
use axum::routing::{get, post, put};
use axum::Router;
use confplane_core::dissemination::Label;
use confplane_core::model::validation_document_from_yaml;
use confplane_core::{Config, ConfigId, ConfigKind, ControlPlane, JsonStyle, LabelQuery, LabelValue, SchemaId};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::json_response;

type Plane = State<Arc<ControlPlane>>;
type Reply = Result<Response, ApiError>;

/// Path parameters; a rejection becomes `MALFORMED_INPUT`.
struct ApiPath<T>(T);

impl<S: Send + Sync, T: DeserializeOwned + Send> FromRequestParts<S> for ApiPath<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        Path::<T>::from_request_parts(parts, state)
            .await
            .map(|Path(v)| ApiPath(v))
            .map_err(|e| ApiError::malformed(e.body_text()))
    }
}

struct ApiQuery<T>(T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for ApiQuery<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(v)| ApiQuery(v))
            .map_err(|e| ApiError::malformed(e.body_text()))
    }
}

/// JSON request body, accepted regardless of content type.
struct ApiJson<T>(T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = Bytes::from_request(req, state).await.map_err(|e| ApiError::malformed(e.body_text()))?;
        serde_json::from_slice(&bytes)
            .map(ApiJson)
            .map_err(|e| ApiError::malformed(format!("invalid request body: {e}")))
    }
}

/// Runs a store operation off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.unwrap_or_else(|e| Err(ApiError::internal(format!("request aborted: {e}"))))
}

fn ok<T: Serialize>(value: &T) -> Reply {
    Ok(json_response(StatusCode::OK, value))
}

fn created<T: Serialize>(value: &T) -> Reply {
    Ok(json_response(StatusCode::CREATED, value))
}

/// `configs` and `groups` path segments.
fn kind_segment(segment: &str) -> Result<ConfigKind, ApiError> {
    match segment {
        "configs" => Ok(ConfigKind::Standalone),
        "groups" => Ok(ConfigKind::Group),
        other => Err(ApiError::not_found(format!("no such collection {other:?}; expected configs or groups"))),
    }
}

fn parse_query(text: &str) -> Result<LabelQuery, ApiError> {
    Ok(text.parse::<LabelQuery>()?)
}

pub fn router(plane: Arc<ControlPlane>) -> Router {
    Router::new()
        .route("/v1/orgs/{org}/{kind}", post(put_config).get(list_names))
        .route("/v1/orgs/{org}/{kind}/{name}/timeline", get(timeline))
        .route("/v1/orgs/{org}/{kind}/{name}/diff", get(diff))
        .route("/v1/orgs/{org}/{kind}/{name}/{version}", get(get_config))
        .route("/v1/schemas", post(put_schema))
        .route("/v1/schemas/{org}/{name}/history", get(schema_history))
        .route("/v1/schemas/{org}/{name}/{version}", get(get_schema).delete(delete_schema))
        .route("/v1/schemas/{org}/{name}/{version}/validate", post(validate))
        .route("/v1/nodes", post(register_node).get(list_nodes))
        .route("/v1/nodes/{id}/labels", put(set_labels))
        .route("/v1/nodes/{id}/namespaces/{ns}/configs", get(fetch))
        .route("/v1/disseminations", post(disseminate))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .with_state(plane)
}

/// Schema references travel either as `{organization,name,version}` or as `org/name/version`.
#[derive(Deserialize)]
#[serde(untagged)]
enum SchemaRef {
    Id(SchemaId),
    Text(String),
}

impl SchemaRef {
    fn resolve(self) -> Result<SchemaId, ApiError> {
        match self {
            SchemaRef::Id(id) => Ok(id),
            SchemaRef::Text(text) => Ok(text.parse()?),
        }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct PutConfigBody {
    name: String,
    version: String,
    yaml: String,
    #[serde(default)]
    schema_ref: Option<SchemaRef>,
}

async fn put_config(
    State(plane): Plane,
    ApiPath((org, kind)): ApiPath<(String, String)>,
    ApiJson(body): ApiJson<PutConfigBody>,
) -> Reply {
    let kind = kind_segment(&kind)?;
    let id = ConfigId::new(org, body.name, body.version)?;
    let config = Config::from_yaml(id, kind, &body.yaml)?;
    let schema = body.schema_ref.map(SchemaRef::resolve).transpose()?;
    let record = blocking(move || Ok(plane.versions().put_config(&config, schema.as_ref())?)).await?;
    created(&record)
}

async fn list_names(State(plane): Plane, ApiPath((org, kind)): ApiPath<(String, String)>) -> Reply {
    let kind = kind_segment(&kind)?;
    ok(&blocking(move || Ok(plane.versions().list_names(&org, kind)?)).await?)
}

async fn get_config(
    State(plane): Plane,
    ApiPath((org, kind, name, version)): ApiPath<(String, String, String, String)>,
) -> Reply {
    let kind = kind_segment(&kind)?;
    let id = ConfigId::new(org, name, version)?;
    ok(&blocking(move || Ok(plane.versions().get_config(&id, kind)?)).await?)
}

async fn timeline(State(plane): Plane, ApiPath((org, kind, name)): ApiPath<(String, String, String)>) -> Reply {
    let kind = kind_segment(&kind)?;
    ok(&blocking(move || Ok(plane.versions().timeline(&org, &name, kind)?)).await?)
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct DiffParams {
    #[serde(rename = "ref")]
    reference: String,
    target: String,
    ref_org: Option<String>,
    ref_name: Option<String>,
}

/// The diff body keeps the pretty layout of the documented diff format.
async fn diff(
    State(plane): Plane,
    ApiPath((org, kind, name)): ApiPath<(String, String, String)>,
    ApiQuery(params): ApiQuery<DiffParams>,
) -> Reply {
    let kind = kind_segment(&kind)?;
    let reference = ConfigId::new(
        params.ref_org.unwrap_or_else(|| org.clone()),
        params.ref_name.unwrap_or_else(|| name.clone()),
        params.reference,
    )?;
    let target = ConfigId::new(org, name, params.target)?;
    let diff = blocking(move || Ok(plane.versions().diff_versions(&reference, &target, kind)?)).await?;
    Ok(crate::text_response(StatusCode::OK, confplane_core::diff::render_diff_json(&diff, JsonStyle::Pretty)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PutSchemaBody {
    organization: String,
    name: String,
    version: String,
    yaml: String,
}

async fn put_schema(State(plane): Plane, ApiJson(body): ApiJson<PutSchemaBody>) -> Reply {
    let id = SchemaId::new(body.organization, body.name, body.version)?;
    created(&blocking(move || Ok(plane.schemas().store_schema(&id, &body.yaml)?)).await?)
}

async fn get_schema(State(plane): Plane, ApiPath((org, name, version)): ApiPath<(String, String, String)>) -> Reply {
    let id = SchemaId::new(org, name, version)?;
    ok(&blocking(move || Ok(plane.schemas().get_schema(&id)?)).await?)
}

async fn schema_history(State(plane): Plane, ApiPath((org, name)): ApiPath<(String, String)>) -> Reply {
    ok(&blocking(move || Ok(plane.schemas().schema_history(&org, &name)?)).await?)
}

#[derive(Serialize)]
struct Deleted {
    deleted: SchemaId,
}

async fn delete_schema(State(plane): Plane, ApiPath((org, name, version)): ApiPath<(String, String, String)>) -> Reply {
    let id = SchemaId::new(org, name, version)?;
    let deleted = id.clone();
    blocking(move || Ok(plane.schemas().delete_schema(&id)?)).await?;
    ok(&Deleted { deleted })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValidateBody {
    kind: ConfigKind,
    yaml: String,
}

#[derive(Serialize)]
struct ValidationOutcome {
    valid: bool,
    violations: Vec<confplane_core::Violation>,
}

async fn validate(
    State(plane): Plane,
    ApiPath((org, name, version)): ApiPath<(String, String, String)>,
    ApiJson(body): ApiJson<ValidateBody>,
) -> Reply {
    let id = SchemaId::new(org, name, version)?;
    let document = validation_document_from_yaml(body.kind, &body.yaml)?;
    let violations = blocking(move || Ok(plane.schemas().validate(&document, &id)?)).await?;
    ok(&ValidationOutcome { valid: violations.is_empty(), violations })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelBody {
    key: String,
    value: LabelValue,
}

fn labels(body: Vec<LabelBody>) -> Vec<Label> {
    body.into_iter().map(|l| Label::new(l.key, l.value)).collect()
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RegisterNodeBody {
    node_id: String,
    organization: String,
    #[serde(default)]
    labels: Vec<LabelBody>,
}

async fn register_node(State(plane): Plane, ApiJson(body): ApiJson<RegisterNodeBody>) -> Reply {
    let node = blocking(move || {
        Ok(plane.dissemination().register_node(&body.node_id, &body.organization, labels(body.labels))?)
    })
    .await?;
    created(&node)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetLabelsBody {
    labels: Vec<LabelBody>,
}

async fn set_labels(State(plane): Plane, ApiPath(id): ApiPath<String>, ApiJson(body): ApiJson<SetLabelsBody>) -> Reply {
    ok(&blocking(move || Ok(plane.dissemination().set_labels(&id, labels(body.labels))?)).await?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeListParams {
    org: String,
    query: Option<String>,
}

async fn list_nodes(State(plane): Plane, ApiQuery(params): ApiQuery<NodeListParams>) -> Reply {
    let query = params.query.as_deref().map(parse_query).transpose()?;
    let nodes = blocking(move || {
        Ok(match query {
            Some(query) => plane.dissemination().select_nodes(&params.org, &query)?,
            None => plane.dissemination().list_nodes(&params.org)?,
        })
    })
    .await?;
    ok(&nodes)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DisseminateBody {
    org: String,
    kind: ConfigKind,
    name: String,
    version: String,
    namespace: String,
    query: String,
}

async fn disseminate(State(plane): Plane, ApiJson(body): ApiJson<DisseminateBody>) -> Reply {
    let id = ConfigId::new(body.org, body.name, body.version)?;
    let query = parse_query(&body.query)?;
    let placement =
        blocking(move || Ok(plane.dissemination().disseminate(&id, body.kind, &body.namespace, &query)?)).await?;
    created(&placement)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FetchParams {
    name: Option<String>,
}

async fn fetch(
    State(plane): Plane,
    ApiPath((id, ns)): ApiPath<(String, String)>,
    ApiQuery(params): ApiQuery<FetchParams>,
) -> Reply {
    ok(&blocking(move || Ok(plane.dissemination().fetch_config(&id, &ns, params.name.as_deref())?)).await?)
}
