//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // -- images and PGM codec --
    #[error("unsupported magic {0:?}, expected \"P5\"")]
    UnsupportedMagic(String),
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("unsupported maxval {0}, expected at most 255")]
    MaxvalTooLarge(u32),
    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    TruncatedPixelData { expected: usize, found: usize },
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },
    #[error("pixel buffer of length {len} does not match {width}x{height}")]
    BadPixelCount {
        width: usize,
        height: usize,
        len: usize,
    },
    #[error("non-finite intensity at index {0}")]
    NonFiniteIntensity(usize),
    #[error("window side must be odd and positive, got {0}")]
    EvenSide(usize),
    #[error("block center ({row}, {col}) outside {width}x{height} image")]
    CenterOutOfBounds {
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    },
    #[error("images have mismatched dimensions: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    // -- blur kernels and degradation --
    #[error("gaussian variance must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("pillbox radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("target BSNR must be finite, got {0}")]
    NonFiniteBsnr(f64),
    #[error("blurred image is constant, so the BSNR is undefined")]
    ConstantImage,
    #[error("noise variance must be positive, got {0}")]
    NonPositiveNoiseVariance(f64),
    #[error("restored image equals the reference exactly, so the ISNR is infinite")]
    InfiniteIsnr,

    // -- vector quantization --
    #[error("vector length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("codebook must contain at least one codeword")]
    EmptyCodebook,
    #[error("input vector set is empty")]
    EmptyInput,
    #[error("codebook size must be a power of two, got {0}")]
    NotPowerOfTwo(usize),
    #[error("{got} training vectors cannot support {needed} codewords")]
    TooFewVectors { needed: usize, got: usize },
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("stride must be at least 1")]
    ZeroStride,
    #[error("codebook data has bad magic, expected \"VQCB\"")]
    CodebookBadMagic,
    #[error("unsupported codebook version {0}")]
    CodebookBadVersion(u32),
    #[error("codebook data truncated: expected {expected} bytes, found {found}")]
    CodebookTruncated { expected: usize, found: usize },
    #[error("unknown blur family tag {0}")]
    BadFamilyTag(u8),

    // -- training and restoration --
    #[error("too few training pairs: {got} for codebook size {needed}")]
    TooFewTrainingPairs { needed: usize, got: usize },
    #[error("flat/nonflat threshold must be nonnegative, got {0}")]
    NegativeTau(f64),

    // -- blur identification --
    #[error("candidate blur parameters must be nonempty and strictly increasing")]
    BadCandidateParams,
    #[error("bank family must be gaussian or pillbox")]
    BadBankFamily,
    #[error("image {width}x{height} is smaller than a {side}x{side} block")]
    ImageTooSmall {
        width: usize,
        height: usize,
        side: usize,
    },
    #[error("malformed bank manifest: {0}")]
    MalformedManifest(String),

    // -- nearest-neighbour restoration --
    #[error("every pixel is corrupted, so restoration is undefined")]
    AllPixelsCorrupted,
    #[error("pixel ({0}, {1}) is not corrupted")]
    NotCorrupted(usize, usize),
    #[error("neighbour count must be at least 1")]
    ZeroNeighbors,
    #[error("salt fraction must lie in [0, 1], got {0}")]
    BadFraction(f64),

    // -- constrained least squares --
    #[error("regularization parameter must be nonnegative, got {0}")]
    NegativeAlpha(f64),
    #[error("BSNR must be positive to derive a regularization parameter, got {0}")]
    NonPositiveBsnrForAlpha(f64),
    #[error("restoration filter is singular at frequency ({0}, {1})")]
    SingularInverse(usize, usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
