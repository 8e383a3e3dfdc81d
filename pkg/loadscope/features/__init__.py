from loadscope.features.design import (
    VARIANTS, FeatureSpec, build_design_matrix, build_feature_rows,
    climatological_temperature,)
from loadscope.features.social import (
    ClusterResult, SocialFactors, cluster_textual_features,
    derive_social_factors, extract_centroids, select_k_elbow,)

__all__ = (
    'ClusterResult',
    'FeatureSpec',
    'SocialFactors',
    'VARIANTS',
    'build_design_matrix',
    'build_feature_rows',
    'climatological_temperature',
    'cluster_textual_features',
    'derive_social_factors',
    'extract_centroids',
    'select_k_elbow',
)
