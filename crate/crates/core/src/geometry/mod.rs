//! Camera poses, similarity alignment and pose-accuracy metrics.

mod accuracy;
mod pose;
mod similarity;

pub use self::accuracy::{
    pose_auc, pose_errors, relative_rotation_error, relative_translation_error, AucCombine,
    PoseErrors,
};
pub use self::pose::{CameraPose, Convention};
pub use self::similarity::{align_poses, apply_similarity, umeyama_align, SimilarityTransform};
