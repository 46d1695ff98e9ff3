#pragma once

// Umbrella header.

#include "codebook.hpp"
#include "complexity.hpp"
#include "config.hpp"
#include "cube_io.hpp"
#include "detection.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "export.hpp"
#include "nearfield.hpp"
#include "pipeline.hpp"
#include "provenance.hpp"
#include "random.hpp"
#include "scene.hpp"
#include "serialization.hpp"
#include "spread.hpp"
#include "stap.hpp"
#include "training.hpp"
