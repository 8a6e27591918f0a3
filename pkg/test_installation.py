#!/usr/bin/env python3
"""
Simple test script to verify grouserlab installation and basic functionality.

Run this script after installation to ensure everything is working correctly.
"""

import sys


def test_dependencies():
    """Test that required dependencies are available."""
    print("🔍 Testing dependencies...")

    required_packages = [
        "numpy", "scipy", "pandas", "openpyxl",
        "rich", "click", "pydantic", "yaml", "dotenv"
    ]

    missing = []
    for package in required_packages:
        try:
            __import__(package)
        except ImportError:
            missing.append(package)

    if missing:
        print(f"❌ Missing packages: {', '.join(missing)}")
        print("   Run: pip install -r requirements.txt")
        return False
    else:
        print("✅ All required dependencies available")
        return True


def test_imports():
    """Test that all core modules can be imported."""
    print("\n🔍 Testing imports...")

    try:
        from grouserlab.analysis.scaling import ScalingFit  # noqa: F401
        from grouserlab.kinematics.cam import build_profile  # noqa: F401
        from grouserlab.main import cli  # noqa: F401
        from grouserlab.sim.testbed import run_trial  # noqa: F401
        print("✅ All core modules imported successfully")
        return True
    except ImportError as e:
        print(f"❌ Import error: {e}")
        return False


def test_shipped_data():
    """Test that the shipped configuration and sieve fixtures load."""
    print("\n🔍 Testing shipped data...")

    try:
        from grouserlab.config import load_campaign_config, load_terrain_calibration, sieve_fixture

        calibration = load_terrain_calibration()
        config = load_campaign_config()
        for name in ("pea_gravel.csv", "vigoro_rock.csv", "filtered_quikrete_fine.csv"):
            sieve_fixture(name)
        print(f"✅ {len(calibration.terrains)} terrains, {config.trial_count} trials per campaign")
        return True
    except Exception as e:
        print(f"❌ Shipped data error: {e}")
        return False


def test_cam_table():
    """Test that the cam offset-to-height table builds."""
    print("\n🔍 Testing cam table...")

    try:
        from grouserlab.config import CamConfig
        from grouserlab.kinematics.cam import height_from_offset
        from grouserlab.sim.testbed import load_cam_table

        table = load_cam_table(CamConfig())
        full = height_from_offset(table, table.offset_rad[-1])
        print(f"✅ Cam table with {len(table)} samples, full deployment {full:.2f} mm")
        return True
    except Exception as e:
        print(f"❌ Cam table error: {e}")
        return False


def test_prediction():
    """Test that the published scaling fit predicts a height."""
    print("\n🔍 Testing height prediction...")

    try:
        from grouserlab.analysis.scaling import ScalingFit, predict_height

        prediction = predict_height(ScalingFit.published(), 9.7)
        if abs(prediction.h_mm - 8.035) < 0.01:
            print(f"✅ Pea gravel h* = {prediction.h_mm:.3f} mm")
            return True
        else:
            print(f"❌ Unexpected prediction: {prediction.h_mm:.3f} mm")
            return False
    except Exception as e:
        print(f"❌ Prediction error: {e}")
        return False


def main():
    """Run all tests."""
    print("⚙️  grouserlab Installation Test\n")
    print("=" * 50)

    tests = [
        test_dependencies,
        test_imports,
        test_shipped_data,
        test_cam_table,
        test_prediction,
    ]

    passed = 0
    total = len(tests)

    for test in tests:
        if test():
            passed += 1

    print("\n" + "=" * 50)
    print(f"📊 Test Results: {passed}/{total} passed")

    if passed == total:
        print("\n🎉 All tests passed! grouserlab is ready to use.")
        print("\nNext steps:")
        print("1. Run: grouserlab predict 35.1 9.7 0.33")
        print("2. Run: grouserlab simulate -t pea_gravel -h 7.0")
        print("3. Run: pytest")
        return True
    else:
        print(f"\n⚠️  {total - passed} tests failed. Please check the errors above.")
        print("\nTroubleshooting:")
        print("1. Make sure you've run: pip install -e .")
        print("2. Check that you're using Python 3.9+")
        return False


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
