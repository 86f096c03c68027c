use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for ensemble member `member`: one ChaCha stream per member, so
/// draws do not depend on execution order.
pub fn member_rng(root: u64, member: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(root);
    r.set_stream(member);
    r
}
