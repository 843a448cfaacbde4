use std::path::Path;

use tubepulse_core::request::PredictRequest;

use super::{json_line, model_paths, read_input, write_out, Io};
use crate::args::PredictArgs;
use crate::config::Config;
use crate::failure::{CmdResult, Failure};
use crate::service::ModelSet;

fn request_from_flags(a: &PredictArgs) -> PredictRequest {
    PredictRequest {
        id: None,
        title: a.title.clone(),
        description: a.description.clone(),
        tags: a.tags.clone(),
        category_id: a.category_id,
        channel_title: a.channel_title.clone(),
        published_at: a.published_at.clone(),
        as_of: a.as_of.clone(),
        comments_disabled: Some(a.comments_disabled),
        ratings_disabled: Some(a.ratings_disabled),
        likes: a.likes,
        dislikes: a.dislikes,
        comment_count: a.comment_count,
    }
}

fn uses_flags(a: &PredictArgs) -> bool {
    a.title.is_some()
        || a.description.is_some()
        || a.tags.is_some()
        || a.category_id.is_some()
        || a.published_at.is_some()
        || a.as_of.is_some()
}

/// Prints the rounded prediction on one line, then a JSON line with the
/// raw value and the model used.
pub fn run(args: &PredictArgs, config: &Config, io: &mut Io<'_>) -> CmdResult {
    let paths = model_paths(&args.models, config)?;
    if paths.is_empty() {
        return Err(Failure::usage(
            "no model given (pass --model or set models in the config)",
        ));
    }
    let req = match (&args.input, uses_flags(args)) {
        (Some(_), true) => return Err(Failure::usage("pass either --input or video flags, not both")),
        (None, true) => request_from_flags(args),
        (input, false) => {
            let path = input.as_deref().unwrap_or(Path::new("-"));
            let text = read_input(path, io)?;
            PredictRequest::from_json(&text).map_err(|e| Failure::usage(e.to_string()))?
        }
    };
    let req = req.validate(None).map_err(|e| Failure::domain(e.to_string()))?;
    let models = ModelSet::load(&paths)?;
    let p = models.predict(&req).map_err(|e| Failure::domain(e.to_string()))?;
    write_out(io, &format!("{}\n{}", p.predicted_views, json_line(&p)))
}
