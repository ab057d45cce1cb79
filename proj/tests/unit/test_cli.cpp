#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SWARM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run("--help"), 0); }

TEST(Cli, UnknownPresetExitsTwoWithoutOutput) {
  const fs::path out = fs::temp_directory_path() / "swarm_cli_bad_preset";
  fs::remove_all(out);
  EXPECT_EQ(run("train --preset cfg-99 --out " + out.string()), 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, UnknownOptionExitsTwo) { EXPECT_EQ(run("train --warp 9"), 2); }

TEST(Cli, MissingSubcommandExitsTwo) { EXPECT_EQ(run(""), 2); }

TEST(Cli, MissingCheckpointExitsTwo) {
  const fs::path out = fs::temp_directory_path() / "swarm_cli_no_ckpt";
  fs::remove_all(out);
  EXPECT_EQ(run("eval --out " + out.string()), 2);
}

TEST(Cli, TinyTrainSucceeds) {
  const fs::path out = fs::temp_directory_path() / "swarm_cli_train";
  fs::remove_all(out);
  EXPECT_EQ(run("train --policy mlp --steps 50 --seed 3 --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "seed_3" / "checkpoint.txt"));
  fs::remove_all(out);
}
