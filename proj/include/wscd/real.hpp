#pragma once

// Model code is built twice: 32-bit (default) and 64-bit for gradient
// checking. Each build lives in its own inline namespace so both can be
// linked into one binary.
#ifdef WSCD_REAL_DOUBLE
#define WSCD_MODEL_NAMESPACE_BEGIN namespace wscd { inline namespace f64 {
#else
#define WSCD_MODEL_NAMESPACE_BEGIN namespace wscd { inline namespace f32 {
#endif
#define WSCD_MODEL_NAMESPACE_END } }

WSCD_MODEL_NAMESPACE_BEGIN

#ifdef WSCD_REAL_DOUBLE
using real = double;
#else
using real = float;
#endif

WSCD_MODEL_NAMESPACE_END
