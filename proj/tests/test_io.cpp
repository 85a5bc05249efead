#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>

#include "orthosfm/io.hpp"

namespace orthosfm {
namespace {

void expect_parse_error(std::string_view text, std::string_view fragment) {
  try {
    read_frames(text);
    FAIL() << "accepted: " << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-2.0), "-2");
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = (uniform01(rng) - 0.5) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

TEST(SceneJson, RoundTripIsStable) {
  const Scene s = gen_scene(5, 4, 77);
  const std::string text = write_scene(s);
  const Scene back = read_scene(text);
  EXPECT_EQ(back.body, s.body);
  EXPECT_EQ(back.seed, s.seed);
  ASSERT_EQ(back.motions.size(), s.motions.size());
  for (std::size_t i = 0; i < s.motions.size(); ++i) {
    EXPECT_EQ(back.motions[i].rotation(), s.motions[i].rotation());
    EXPECT_EQ(back.motions[i].translation(), s.motions[i].translation());
  }
  EXPECT_EQ(write_scene(back), text);
}

TEST(SceneJson, RejectsBrokenDocuments) {
  EXPECT_THROW(read_scene("{"), Error);
  EXPECT_THROW(read_scene(R"({"points": []})"), Error);

  Json doc = scene_to_json(gen_scene(4, 2, 1));
  Json no_label = doc;
  no_label["points"][0].erase("label");
  EXPECT_THROW(scene_from_json(no_label), Error);

  Json moved_first = doc;
  moved_first["motions"][0]["tx"] = 0.5;
  try {
    scene_from_json(moved_first);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }

  Json not_rotation = doc;
  not_rotation["motions"][1]["rotation"][0] = 2.0;
  EXPECT_THROW(scene_from_json(not_rotation), Error);

  Json collinear = doc;
  for (int i = 0; i < 3; ++i) {
    collinear["points"][i]["x"] = i;
    collinear["points"][i]["y"] = i;
    collinear["points"][i]["z"] = i;
  }
  try {
    scene_from_json(collinear);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }

  Json duplicate = doc;
  duplicate["points"][1]["label"] = duplicate["points"][0]["label"];
  EXPECT_THROW(scene_from_json(duplicate), Error);

  Json bad_seed = doc;
  bad_seed["seed"] = -3;
  EXPECT_THROW(scene_from_json(bad_seed), Error);
}

TEST(FramesCsv, RoundTripIsBitExact) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto frames = add_noise(render(gen_scene(6, 5, seed)),
                                  {0.01, NoiseDistribution::kGaussian, seed});
    const std::string text = write_frames(frames);
    const auto back = read_frames(text);
    EXPECT_EQ(back, frames);
    EXPECT_EQ(write_frames(back), text);
  }
}

TEST(FramesCsv, LayoutAndTolerances) {
  const std::string text = "frame_index,label,x,y\r\n1,P,0,0\r\n1,Q,1,0\r\n\r\n1,R,0,1\r\n"
                           "2,P,0,0\r\n2,Q,1,0.5\r\n2,R,0.25,1\r\n";
  const auto frames = read_frames(text);
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[1].at("Q"), (Point2{1, 0.5}));
  EXPECT_EQ(write_frames(frames).substr(0, 22), "frame_index,label,x,y\n");
}

TEST(FramesCsv, ErrorsNameTheLine) {
  expect_parse_error("", "line 1");
  expect_parse_error("frame,label,x,y\n1,P,0,0\n", "line 1");
  expect_parse_error("frame_index,label,x,y\n1,P,0,0\n1,Q,abc,0\n1,R,0,1\n", "line 3");
  expect_parse_error("frame_index,label,x,y\n1,P,0,0\n1,,1,0\n1,R,0,1\n", "line 3");
  expect_parse_error("frame_index,label,x,y\n1,P,0,0\n1,Q,1\n1,R,0,1\n", "line 3");
  expect_parse_error("frame_index,label,x,y\n1,P,0,0\n1,Q,1,0\n1,R,0,1\n1,P,2,2\n", "line 5");
  expect_parse_error("frame_index,label,x,y\n0,P,0,0\n", "line 2");
  expect_parse_error("frame_index,label,x,y\n1,P,0,0\n1,Q,1,0\n1,R,0,1\n"
                     "3,P,0,0\n3,Q,1,0\n3,R,0,1\n",
                     "line 5");
  expect_parse_error("frame_index,label,x,y\n1,P,0,0\n1,Q,1,0\n1,R,0,1\n"
                     "2,P,0,0\n2,Q,1,0\n2,S,0,1\n",
                     "line 7");
  expect_parse_error("frame_index,label,x,y\n1,P,0,0\n1,Q,1,0\n1,R,0,1\n1,T,1,1\n"
                     "2,P,0,0\n2,Q,1,0\n2,R,0,1\n",
                     "line");
  expect_parse_error("frame_index,label,x,y\n1,P,0,0\n1,Q,inf,0\n1,R,0,1\n", "line 3");
}

TEST(FramesCsv, WriterRejectsUnsafeLabels) {
  const FrameObservation f({{"a,b", {0, 0}}, {"Q", {1, 0}}, {"R", {0, 1}}});
  const std::vector<FrameObservation> frames{f};
  EXPECT_THROW(write_frames(frames), Error);
}

TEST(LengthsJson, NamesEdges) {
  const Json t = lengths_json(TriangleDistances{1, 2, 3});
  EXPECT_EQ(t["a_sq"], 1.0);
  EXPECT_EQ(t["c_sq"], 3.0);
  const Json d = dof_json(dof_balance(3, 3));
  EXPECT_EQ(d["unknowns"], 18);
  EXPECT_EQ(d["recoverable"], true);
}

}  // namespace
}  // namespace orthosfm
