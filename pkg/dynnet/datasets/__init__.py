from .observations import ObservationSet, finite_diff_rhs, synthesize_observations, test_points
