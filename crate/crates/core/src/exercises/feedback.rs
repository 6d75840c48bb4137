//! Fixed feedback strings. Grading parses these back out of the logs, so
//! they must not drift.

pub const MILK_VALID: &str = "Your credit-card number is valid.";
pub const MILK_SHIPPED: &str = "Your milk order will be shipped today!";
pub const MILK_INVALID: &str = "Your credit-card number is not valid.";
pub const MILK_CANCELLED: &str = "Your milk order has been cancelled.";

pub const RSA2_E_OK: &str = "e is correct, let's check p next:";
pub const RSA2_P_BITS: &str = "bitLength(p) == 128, good...";
pub const RSA2_P_PRIME: &str = "p is prime, almost there for p...";
pub const RSA2_P_OK: &str = "gcd(e,p-1) == 1, p is ok, let's check q next:";
pub const RSA2_Q_DISTINCT: &str = "q != p, that's a good start...";
pub const RSA2_Q_BITS: &str = "bitLength(q) == 128, good...";
pub const RSA2_Q_PRIME: &str = "q is prime, almost there for q...";
pub const RSA2_Q_OK: &str = "gcd(e,q-1) == 1, q is ok, let's check d_A next:";
pub const RSA2_DA_BITS: &str = "bitLength(d_A ) >= 240, good...";
pub const RSA2_DA_P: &str = "gcd(d_A ,p-1) == 1, almost there for d_A ...";
pub const RSA2_DA_OK: &str = "gcd(d_A ,q-1) == 1, d_A is ok, let's check d_B next:";
pub const RSA2_DB_NOT_ONE: &str = "d_B != 1, that's a good start...";
pub const RSA2_DB_OK: &str = "e*d_A *d_B == 1, Brilliant!";
pub const RSA2_H_OK: &str = "h(m) is valid, checking signature:";
pub const RSA2_S_OK: &str = "s_AB is valid.";
pub const RSA2_MASTER: &str = " You are the master of RSA2!";

pub const RSA2_E_BAD: &str =
    "e is wrong, it must be your UserID as a base-36 number, plus 1 if even.";
pub const RSA2_P_NOT_BITS: &str = "bitLength(p) != 128, try again.";
pub const RSA2_P_NOT_PRIME: &str = "p is not prime.";
pub const RSA2_P_NOT_COPRIME: &str = "gcd(e,p-1) != 1, p will not work with e.";
pub const RSA2_Q_SAME: &str = "q == p, that will not do.";
pub const RSA2_Q_NOT_BITS: &str = "bitLength(q) != 128, try again.";
pub const RSA2_Q_NOT_PRIME: &str = "q is not prime.";
pub const RSA2_Q_NOT_COPRIME: &str = "gcd(e,q-1) != 1, q will not work with e.";
pub const RSA2_DA_SHORT: &str = "bitLength(d_A ) < 240, d_A is too short.";
pub const RSA2_DA_NOT_P: &str = "gcd(d_A ,p-1) != 1, d_A will not work.";
pub const RSA2_DA_NOT_Q: &str = "gcd(d_A ,q-1) != 1, d_A will not work.";
pub const RSA2_DB_ONE: &str = "d_B == 1, that gives the whole key to d_A.";
pub const RSA2_DB_BAD: &str = "e*d_A *d_B != 1, d_B is wrong.";
pub const RSA2_M_BAD: &str = "m is not the message you were given.";
pub const RSA2_H_BAD: &str = "h(m) is wrong.";
pub const RSA2_S_BAD: &str = "s_AB is not a valid signature.";

pub const RNG_WIN: &str = "Your answer is correct. You win!";
pub const RNG_HARDER: &str = "That was fun. Are you ready for a harder problem?";
pub const RNG_TRY_THIS: &str =
    "Try this: I'll give you just one value from nextLong(), using an instance\n\
of Random initialized in a secret way, not related to the time of day.\n\
And I bet you can't guess the next number...";
pub const RNG_CORRECT: &str = "Your answer is correct.";
pub const RNG_GIVE_UP: &str = "I give up! You are the master of pseudo-random numbers!";
pub const RNG_WRONG: &str = "Your answer is wrong.";

pub const MITM_RETRY: &str = "Get back in the middle and try again.";
pub const MITM_EQUAL: &str = "Ka and Kb are equal, that's non-standard!";
pub const MITM_TRIVIAL: &str = "But Ka and/or Kb are trivial, that doesn't count.";
pub const MITM_PART1_OK: &str = "Ka and Kb are both non-trivial, you are in the middle!";
pub const MITM_PART1_NEXT: &str =
    "Decrypt Alice's message with Ka, encrypt it for Bob with Kb, and submit M and Cb.";
pub const MITM_DONE: &str = "Bob got the message and suspects nothing. Well done, Darth!";

pub const UAC_OK: &str = "Your user authentication code is correct.";
pub const UAC_BAD: &str = "Your user authentication code is wrong.";

/// Feedback column limit for paragraph-style messages.
pub const WRAP_COLUMNS: usize = 72;

pub fn answer_line(field: &str, correct: bool) -> String {
    format!(
        "Your answer for {field} is {}.",
        if correct { "correct" } else { "wrong" }
    )
}

/// Greedy word wrap on single spaces. Words longer than `width` stay whole.
pub fn wrap_paragraph(text: &str, width: usize) -> String {
    let mut out = String::new();
    let mut line_len = 0;
    for word in text.split(' ').filter(|w| !w.is_empty()) {
        if line_len > 0 && line_len + 1 + word.len() > width {
            out.push('\n');
            line_len = 0;
        } else if line_len > 0 {
            out.push(' ');
            line_len += 1;
        }
        out.push_str(word);
        line_len += word.len();
    }
    out
}
