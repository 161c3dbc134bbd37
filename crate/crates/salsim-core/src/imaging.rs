//! Dechirp imaging pipeline (beat assembly through azimuth compression).
