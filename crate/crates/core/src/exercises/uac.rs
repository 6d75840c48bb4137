use std::collections::BTreeMap;

use super::feedback::{UAC_BAD, UAC_OK};
use super::{part, ExerciseError, GenInput, Outcome, Submission};
use crate::identity::StudentIdentity;
use crate::seedgen::DerivationContext;

pub struct Params {
    pub code_hex: String,
}

pub fn build(input: &GenInput) -> Result<Params, ExerciseError> {
    let identity = StudentIdentity::derive(input.ctx, input.user_id)?;
    Ok(Params {
        code_hex: identity.uac_hex(),
    })
}

pub fn publish(_: &Params) -> (BTreeMap<String, String>, String) {
    let statement = "Submit the 64-hex-digit user authentication code you received from the\n\
                     authentication server after a successful level 3 login."
        .to_string();
    (BTreeMap::new(), statement)
}

pub fn check(p: &Params, sub: &Submission) -> Outcome {
    let correct = sub.field("code").eq_ignore_ascii_case(&p.code_hex);
    let line = if correct { UAC_OK } else { UAC_BAD };
    Outcome {
        parts: vec![part("code", correct, line)],
        body: line.to_string(),
        reward: None,
    }
}

/// Instructor-side only: the code is not derivable from the page.
pub fn solve(
    ctx: &DerivationContext,
    user_id: &str,
) -> Result<BTreeMap<String, String>, ExerciseError> {
    let identity = StudentIdentity::derive(ctx, user_id)?;
    Ok(BTreeMap::from([("code".to_string(), identity.uac_hex())]))
}
