#!/usr/bin/env python3
"""
萤火虫反向传播神经网络训练工具 环境检查脚本
"""

import importlib
import sys
from pathlib import Path

REQUIRED_PACKAGES = ["numpy", "pandas", "matplotlib"]


def check_dependencies():
    """检查运行所需的依赖包"""
    print("=== 依赖包检查 ===")

    python_version = sys.version_info
    print(f"✅ Python版本: {python_version.major}.{python_version.minor}.{python_version.micro}")

    missing_packages = []
    for package in REQUIRED_PACKAGES:
        try:
            module = importlib.import_module(package)
            print(f"✅ {package} {getattr(module, '__version__', '')}".rstrip())
        except ImportError:
            print(f"❌ {package} - 未安装")
            missing_packages.append(package)

    if missing_packages:
        print(f"\n❌ 缺少 {len(missing_packages)} 个依赖包")
        print("请运行: pip install -r requirements.txt")
        return False
    return True


def check_config_file():
    """导入配置文件并执行 validate_config()"""
    print("\n=== 配置文件检查 ===")

    try:
        from .CONFIG import DATA_DIR, EXPERIMENT_CONFIG, FIREFLY_CONFIG, validate_config

        print(f"✅ 数据目录: {DATA_DIR}")
        print(f"✅ 默认运行: {EXPERIMENT_CONFIG['algorithm']} / {EXPERIMENT_CONFIG['dataset']}")
        print(f"✅ 萤火虫移动空间: {FIREFLY_CONFIG['movement_space']}")

        config_errors = validate_config()
        if config_errors:
            print("❌ 配置验证失败:")
            for error in config_errors:
                print(f"  - {error}")
            return False
        print("✅ 配置验证通过")
        return True

    except Exception as e:
        print(f"❌ 配置文件检查失败: {e}")
        return False


def check_data_files(data_dir=None):
    """加载数据目录中的每个内置数据集"""
    print("\n=== 数据文件检查 ===")

    from .CONFIG import BUILTIN_SCHEMAS, DATA_DIR, get_dataset_path
    from .errors import DatasetError
    from .tools.dataset_loader import load_builtin

    data_dir = Path(data_dir or DATA_DIR)
    if not data_dir.exists():
        print(f"❌ 数据目录不存在: {data_dir}")
        return False

    problems = 0
    for name in BUILTIN_SCHEMAS:
        path = get_dataset_path(name, data_dir)
        try:
            dataset = load_builtin(name, data_dir)
            print(f"✅ {name}: {path.name} ({dataset.n_rows} 行, {dataset.n_features} 个特征, {dataset.n_classes} 个类别)")
        except DatasetError as e:
            print(f"❌ {name}: {e}")
            problems += 1

    if problems:
        print(f"\n❌ {problems} 个数据集不可用")
        return False
    return True


def main(data_dir=None):
    """运行所有检查，全部通过时返回 True"""
    print("🔍 firefly_bpnn 配置检查")
    print("=" * 50)

    checks = [
        ("依赖包", check_dependencies),
        ("配置文件", check_config_file),
        ("数据文件", lambda: check_data_files(data_dir)),
    ]

    passed = 0
    total = len(checks)

    for check_name, check_func in checks:
        try:
            if check_func():
                passed += 1
                print(f"✅ {check_name}检查通过")
            else:
                print(f"❌ {check_name}检查失败")
        except Exception as e:
            print(f"❌ {check_name}检查异常: {e}")

    print("\n" + "=" * 50)
    print(f"📊 检查结果: {passed}/{total} 通过")

    if passed == total:
        print("🎉 所有检查通过，可以开始训练！")
        print("\n下一步:")
        print("1. python -m firefly_bpnn.main train --algo fabpnn --dataset iris")
        print("2. python -m pytest")
        return True
    print("⚠️  部分检查失败，请修复后重试。")
    return False


if __name__ == "__main__":
    success = main(sys.argv[1] if len(sys.argv) > 1 else None)
    sys.exit(0 if success else 1)
