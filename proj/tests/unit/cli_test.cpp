// Copyright 2026 The LGC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exit-code contract of the command-line tool.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("lgc_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string(LGC_TOOL) + " " + args + " >" + (dir_ / "out.txt").string() + " 2>" +
                            (dir_ / "err.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name);
    return {std::istreambuf_iterator<char>(in), {}};
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const char* kSmallScene = "--frames 2 --map-res 16 --image-size 48";

TEST_F(CliTest, EncodeReportDecodeRender) {
  ASSERT_EQ(run(std::string("encode ") + kSmallScene + " -o " + path("a.hgca")), 0) << read("err.txt");
  ASSERT_EQ(run("report " + path("a.hgca")), 0);
  EXPECT_EQ(read("out.txt").rfind("layer,bytes,percent", 0), 0u);
  ASSERT_EQ(run("decode " + path("a.hgca") + " -d " + path("dec")), 0) << read("err.txt");
  EXPECT_TRUE(fs::exists(dir_ / "dec" / "weights.hgwt"));
  EXPECT_TRUE(fs::exists(dir_ / "dec" / "poses.hgps"));
  ASSERT_EQ(run("render " + path("a.hgca") + " -d " + path("img")), 0) << read("err.txt");
  EXPECT_TRUE(fs::exists(dir_ / "img" / "frame_0001.ppm"));
}

TEST_F(CliTest, InvalidArgumentsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("encode -Q 9 -o " + path("x.hgca")), 2);
  EXPECT_EQ(run("encode -q 0 -o " + path("x.hgca")), 2);
  EXPECT_EQ(run("fit --total-iter 0"), 2);
  EXPECT_EQ(run("no-such-verb"), 2);
}

TEST_F(CliTest, CorruptInputExitsThree) {
  ASSERT_EQ(run(std::string("encode ") + kSmallScene + " -o " + path("a.hgca")), 0);
  const auto size = fs::file_size(dir_ / "a.hgca");
  fs::resize_file(dir_ / "a.hgca", size - 10);
  EXPECT_EQ(run("report " + path("a.hgca")), 3);
  EXPECT_NE(read("err.txt").find("out of bounds"), std::string::npos) << read("err.txt");
  std::ofstream(dir_ / "empty.hgca").close();
  EXPECT_EQ(run("decode " + path("empty.hgca") + " -d " + path("dec")), 3);
}

TEST_F(CliTest, RdSweepWritesCsv) {
  ASSERT_EQ(run(std::string("rd-sweep ") + kSmallScene + " --bits-grid 8,4 --step-grid 1/255"), 0)
      << read("err.txt");
  const std::string csv = read("out.txt");
  EXPECT_EQ(csv.rfind("Q,q,total_bytes,bytes_per_frame,psnr_db,ssim\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

}  // namespace
