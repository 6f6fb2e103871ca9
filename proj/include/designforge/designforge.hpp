// Umbrella header.
#pragma once

#include "designforge/core.hpp"
#include "designforge/complex.hpp"
#include "designforge/extensions.hpp"
#include "designforge/nulldesign.hpp"
#include "designforge/gf.hpp"
#include "designforge/moves.hpp"
#include "designforge/template.hpp"
#include "designforge/nibble.hpp"
#include "designforge/pipeline.hpp"
