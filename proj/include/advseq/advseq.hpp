#pragma once

#include "advseq/attacks.hpp"
#include "advseq/data.hpp"
#include "advseq/diff.hpp"
#include "advseq/io.hpp"
#include "advseq/linalg.hpp"
#include "advseq/models.hpp"
#include "advseq/serialize.hpp"
#include "advseq/training.hpp"

namespace advseq {

inline constexpr const char* kVersion = "0.1.0";

}
