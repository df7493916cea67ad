#pragma once

#include "sslg/camera.hpp"
#include "sslg/config.hpp"
#include "sslg/dataset_io.hpp"
#include "sslg/depth_pipeline.hpp"
#include "sslg/evaluation.hpp"
#include "sslg/fusion.hpp"
#include "sslg/gaussian.hpp"
#include "sslg/image.hpp"
#include "sslg/rgb_pipeline.hpp"
#include "sslg/synth.hpp"
#include "sslg/vdisparity.hpp"
