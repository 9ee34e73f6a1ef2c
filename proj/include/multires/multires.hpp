#pragma once

// Umbrella header for the multires toolkit.

#include "multires/codecs.hpp"
#include "multires/detection_io.hpp"
#include "multires/detections.hpp"
#include "multires/errors.hpp"
#include "multires/evaluation.hpp"
#include "multires/fft.hpp"
#include "multires/image.hpp"
#include "multires/manifest_io.hpp"
#include "multires/spectral.hpp"
#include "multires/svg.hpp"
#include "multires/sweep.hpp"
#include "multires/synthdet.hpp"
#include "multires/voc.hpp"
#include "multires/xml.hpp"
