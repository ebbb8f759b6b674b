#pragma once

// Umbrella header for the whole library.

#include "mdx/analysis.hpp"
#include "mdx/error.hpp"
#include "mdx/fft.hpp"
#include "mdx/harness.hpp"
#include "mdx/manifest.hpp"
#include "mdx/metrics.hpp"
#include "mdx/oracle.hpp"
#include "mdx/parallel.hpp"
#include "mdx/score_io.hpp"
#include "mdx/song_audio.hpp"
#include "mdx/stem.hpp"
#include "mdx/stft.hpp"
#include "mdx/synthetic.hpp"
#include "mdx/table_io.hpp"
#include "mdx/wav.hpp"
#include "mdx/waveform.hpp"
