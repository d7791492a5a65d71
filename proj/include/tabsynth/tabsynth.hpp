#pragma once

#include <tabsynth/matrix.hpp>
#include <tabsynth/rng.hpp>
#include <tabsynth/losses.hpp>
#include <tabsynth/mlp.hpp>
#include <tabsynth/adam.hpp>
#include <tabsynth/gradcheck.hpp>
#include <tabsynth/param_io.hpp>
#include <tabsynth/table.hpp>
#include <tabsynth/csv.hpp>
#include <tabsynth/schema.hpp>
#include <tabsynth/autoencoder.hpp>
#include <tabsynth/sde.hpp>
#include <tabsynth/score_net.hpp>
#include <tabsynth/diffusion.hpp>
#include <tabsynth/gan.hpp>
#include <tabsynth/metrics.hpp>
#include <tabsynth/models.hpp>
#include <tabsynth/tstr.hpp>
#include <tabsynth/report.hpp>
#include <tabsynth/pipeline.hpp>
